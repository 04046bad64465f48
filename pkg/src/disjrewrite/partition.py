"""Term partitions: join, admissibility and associated substitutions."""
from __future__ import annotations

from typing import AbstractSet, Dict, FrozenSet, Iterable, Tuple

from .model import Constant, Substitution, Term, Variable, term_key


class NonAdmissible(ValueError):
    """A partition class holds two distinct constants."""


class UnionFind:
    def __init__(self, items: Iterable = ()):
        self.parent: Dict = {}
        for x in items:
            self.add(x)

    def add(self, x):
        self.parent.setdefault(x, x)

    def find(self, x):
        parent = self.parent
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    def union(self, a, b):
        self.add(a)
        self.add(b)
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra
        return ra

    def classes(self):
        groups: Dict = {}
        for x in self.parent:
            groups.setdefault(self.find(x), set()).add(x)
        return [frozenset(g) for g in groups.values()]


def _class_key(c):
    return min(term_key(t) for t in c)


class TermPartition:
    """A partition of a finite set of terms into disjoint classes."""

    __slots__ = ("classes", "_index")

    def __init__(self, classes: Iterable[Iterable[Term]]):
        cls = [frozenset(c) for c in classes]
        cls = [c for c in cls if c]
        index = {}
        for c in cls:
            for t in c:
                if t in index:
                    raise ValueError(f"term {t!r} occurs in two classes")
                index[t] = c
        self.classes: Tuple[FrozenSet[Term], ...] = tuple(sorted(cls, key=_class_key))
        self._index = index

    @classmethod
    def from_pairs(cls, pairs: Iterable[Tuple[Term, Term]], universe: Iterable[Term] = ()) -> "TermPartition":
        uf = UnionFind(universe)
        for a, b in pairs:
            uf.union(a, b)
        return cls(uf.classes())

    @property
    def universe(self) -> FrozenSet[Term]:
        return frozenset(self._index)

    def class_of(self, t: Term) -> FrozenSet[Term]:
        return self._index[t]

    def __contains__(self, t):
        return t in self._index

    def __eq__(self, other):
        return isinstance(other, TermPartition) and set(self.classes) == set(other.classes)

    def __hash__(self):
        return hash(frozenset(self.classes))

    def __iter__(self):
        return iter(self.classes)

    def __len__(self):
        return len(self.classes)

    def __repr__(self):
        inner = ", ".join("{" + ",".join(sorted(map(repr, c))) + "}" for c in self.classes)
        return "{" + inner + "}"

    def renamed(self, sub: Substitution) -> "TermPartition":
        return TermPartition(frozenset(sub.term(t) for t in c) for c in self.classes)

    def is_admissible(self) -> bool:
        return is_admissible(self)

    def substitution(self, prefer: AbstractSet[Variable] = frozenset()) -> Substitution:
        return associated_substitution(self, prefer)


def join_partitions(parts: Iterable[TermPartition]) -> TermPartition:
    """Union of the partitions with overlapping classes merged to a fixpoint."""
    uf = UnionFind()
    for p in parts:
        for c in p.classes:
            it = iter(c)
            first = next(it)
            uf.add(first)
            for t in it:
                uf.union(first, t)
    return TermPartition(uf.classes())


def is_admissible(p: TermPartition) -> bool:
    return all(sum(isinstance(t, Constant) for t in c) <= 1 for c in p.classes)


def representative(c: Iterable[Term], prefer: AbstractSet[Variable] = frozenset()) -> Term:
    """Constant first, then a preferred variable, then the smallest id."""
    c = list(c)
    consts = [t for t in c if isinstance(t, Constant)]
    if len(consts) > 1:
        raise NonAdmissible(f"class with constants {sorted(map(repr, consts))}")
    if consts:
        return consts[0]
    return min(c, key=lambda v: (v not in prefer, v.id))


def associated_substitution(p: TermPartition, prefer: AbstractSet[Variable] = frozenset()) -> Substitution:
    sub = Substitution()
    for c in p.classes:
        rep = representative(c, prefer)
        for t in c:
            if isinstance(t, Variable) and t != rep:
                sub[t] = rep
    return sub

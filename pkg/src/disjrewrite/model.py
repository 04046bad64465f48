"""Terms, atoms, queries and disjunctive rules.

Atom sets and Boolean CQs are plain ``frozenset`` objects of :class:`Atom`;
a UCQ is a ``frozenset`` of CQs.  Rules keep their atoms in tuples so that
orderings chosen by the user (frontier order, disjunct order) survive.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Dict, FrozenSet, Iterable, Iterator, NamedTuple, Optional, Tuple, Union
from typing import Mapping as Map


class Variable:
    """A variable identified by an integer id; the name is for display only."""

    __slots__ = ("id", "name")

    def __init__(self, id: int, name: Optional[str] = None):
        self.id = id
        self.name = name

    def __eq__(self, other):
        return isinstance(other, Variable) and other.id == self.id

    def __hash__(self):
        return hash(self.id)

    def __repr__(self):
        if self.name is not None:
            return self.name
        return f"_{self.id}"

    is_variable = True


class Constant:
    __slots__ = ("name",)

    def __init__(self, name: str):
        self.name = name

    def __eq__(self, other):
        return isinstance(other, Constant) and other.name == self.name

    def __hash__(self):
        return hash(("c", self.name))

    def __repr__(self):
        return self.name

    is_variable = False


Term = Union[Variable, Constant]


class Predicate(NamedTuple):
    name: str
    arity: int

    def __repr__(self):
        return f"{self.name}/{self.arity}"


class Atom(NamedTuple):
    predicate: Predicate
    args: Tuple[Term, ...]

    def __repr__(self):
        return f"{self.predicate.name}({','.join(map(repr, self.args))})"


AtomSet = FrozenSet[Atom]
CQ = FrozenSet[Atom]
UCQ = FrozenSet[CQ]


def atom(pred: str, *args: Term) -> Atom:
    return Atom(Predicate(pred, len(args)), tuple(args))


class VariableSource:
    """Monotone issuer of fresh variable ids."""

    def __init__(self, start: int = 1):
        self._counter = itertools.count(start)

    def fresh(self, name: Optional[str] = None) -> Variable:
        return Variable(next(self._counter), name)


_default_source = VariableSource()


def fresh_variable(name: Optional[str] = None, source: Optional[VariableSource] = None) -> Variable:
    return (source or _default_source).fresh(name)


# Canonical variables: negative ids, never issued by a VariableSource.  Every
# canonically renamed CQ uses them, so CQs equal up to the canonical
# renaming collapse under plain set equality.
_canonical_pool: Dict[int, Variable] = {}


def canonical_variable(k: int) -> Variable:
    v = _canonical_pool.get(k)
    if v is None:
        v = _canonical_pool[k] = Variable(-(k + 1), f"V{k}")
    return v


def term_key(t: Term):
    if isinstance(t, Constant):
        return (0, t.name, 0)
    return (1, "", t.id)


def atom_key(a: Atom):
    return (a.predicate.name, a.predicate.arity, tuple(term_key(t) for t in a.args))


def sorted_atoms(atoms: Iterable[Atom]) -> list:
    return sorted(atoms, key=atom_key)


def vars_of(atoms: Iterable[Atom]) -> set:
    return {t for a in atoms for t in a.args if isinstance(t, Variable)}


def consts_of(atoms: Iterable[Atom]) -> set:
    return {t for a in atoms for t in a.args if isinstance(t, Constant)}


def terms_of(atoms: Iterable[Atom]) -> set:
    return {t for a in atoms for t in a.args}


def preds_of(atoms: Iterable[Atom]) -> set:
    return {a.predicate for a in atoms}


def ordered_vars(atoms: Iterable[Atom]) -> list:
    """Variables in first-occurrence order."""
    seen = {}
    for a in atoms:
        for t in a.args:
            if isinstance(t, Variable) and t not in seen:
                seen[t] = None
    return list(seen)


class Substitution(dict):
    """Map from variables to terms; unmapped terms are left unchanged."""

    @classmethod
    def solved(cls, mapping: Map[Variable, Term]) -> "Substitution":
        """Resolve chains so that no mapped variable occurs in an image."""
        out = cls()
        for v in mapping:
            t = mapping[v]
            seen = {v}
            while isinstance(t, Variable) and t in mapping and t not in seen:
                seen.add(t)
                t = mapping[t]
            if t != v:
                out[v] = t
        return out

    def term(self, t: Term) -> Term:
        return self.get(t, t) if isinstance(t, Variable) else t

    def atom(self, a: Atom) -> Atom:
        return Atom(a.predicate, tuple(self.get(t, t) if isinstance(t, Variable) else t for t in a.args))

    def atoms(self, atoms: Iterable[Atom]) -> frozenset:
        return frozenset(self.atom(a) for a in atoms)

    def __call__(self, x):
        if isinstance(x, Atom):
            return self.atom(x)
        if isinstance(x, (Variable, Constant)):
            return self.term(x)
        return self.atoms(x)


def safe_copy(atoms: Iterable[Atom], source: Optional[VariableSource] = None):
    """Rename every variable of ``atoms`` with a fresh one.

    Returns the renamed set and the renaming.
    """
    atoms = list(atoms)
    renaming = Substitution({v: fresh_variable(v.name, source) for v in ordered_vars(sorted_atoms(atoms))})
    return renaming.atoms(atoms), renaming


# --- canonical forms -----------------------------------------------------

def _refined_colors(atoms, rounds=3):
    variables = ordered_vars(sorted_atoms(atoms))
    color = {v: 0 for v in variables}
    for _ in range(rounds):
        sigs = {v: [] for v in variables}
        for a in atoms:
            shape = tuple(("c", t.name) if isinstance(t, Constant) else ("v", color[t]) for t in a.args)
            for pos, t in enumerate(a.args):
                if isinstance(t, Variable):
                    sigs[t].append((a.predicate.name, a.predicate.arity, pos, shape))
        keyed = {v: tuple(sorted(s)) for v, s in sigs.items()}
        ranks = {s: i for i, s in enumerate(sorted(set(keyed.values())))}
        new = {v: ranks[keyed[v]] for v in variables}
        if len(set(new.values())) == len(set(color.values())):
            color = new
            break
        color = new
    return color


def canonical_renaming(atoms: Iterable[Atom]) -> Substitution:
    """Renaming onto the canonical variables V0, V1, ... .

    Variables are numbered by first occurrence after sorting atoms on a
    renaming-invariant key; remaining ties fall back to id order.
    """
    atoms = list(set(atoms))
    color = _refined_colors(atoms)

    def key(a):
        return (a.predicate.name, a.predicate.arity,
                tuple((0, t.name) if isinstance(t, Constant) else (1, color[t]) for t in a.args),
                atom_key(a))

    ren = Substitution()
    for a in sorted(atoms, key=key):
        for t in a.args:
            if isinstance(t, Variable) and t not in ren:
                ren[t] = canonical_variable(len(ren))
    return ren


def canonical_cq(atoms: Iterable[Atom]) -> CQ:
    atoms = frozenset(atoms)
    return canonical_renaming(atoms).atoms(atoms)


def format_term(t: Term) -> str:
    return t.name if isinstance(t, Constant) else (t.name or f"_{t.id}")


def format_atom(a: Atom, names: Optional[Map[Variable, str]] = None) -> str:
    def fmt(t):
        if names is not None and isinstance(t, Variable) and t in names:
            return names[t]
        return format_term(t)
    return f"{a.predicate.name}({','.join(fmt(t) for t in a.args)})"


def canonical_string(q: Iterable[Atom]) -> str:
    """Stable text for a CQ, equal for CQs that differ by the library's renamings."""
    return _canonical_string(frozenset(q))


@lru_cache(maxsize=1 << 16)
def _canonical_string(q: CQ) -> str:
    return ", ".join(sorted(format_atom(a) for a in canonical_cq(q)))


def sorted_cqs(ucq: Iterable[CQ]) -> list:
    return sorted(ucq, key=canonical_string)


# --- rules ---------------------------------------------------------------

def _dedup(atoms: Iterable[Atom]) -> Tuple[Atom, ...]:
    return tuple(dict.fromkeys(atoms))


@dataclass(frozen=True)
class DisjunctiveRule:
    body: Tuple[Atom, ...]
    head: Tuple[Tuple[Atom, ...], ...]
    name: Optional[str] = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "body", _dedup(self.body))
        object.__setattr__(self, "head", tuple(_dedup(h) for h in self.head))
        if not self.body:
            raise ValueError("rule body must be nonempty")
        if not self.head or any(not h for h in self.head):
            raise ValueError("rule head disjuncts must be nonempty")

    @cached_property
    def body_vars(self) -> FrozenSet[Variable]:
        return frozenset(vars_of(self.body))

    @cached_property
    def frontier(self) -> Tuple[Variable, ...]:
        """Frontier variables in first-occurrence order over the head."""
        return tuple(v for v in ordered_vars(a for h in self.head for a in h) if v in self.body_vars)

    def disjunct_frontier(self, i: int) -> Tuple[Variable, ...]:
        return tuple(v for v in ordered_vars(self.head[i]) if v in self.body_vars)

    def existentials(self, i: int) -> FrozenSet[Variable]:
        return frozenset(vars_of(self.head[i])) - self.body_vars

    @cached_property
    def all_existentials(self) -> FrozenSet[Variable]:
        return frozenset().union(*(self.existentials(i) for i in range(len(self.head))))

    @cached_property
    def variables(self) -> FrozenSet[Variable]:
        return frozenset(vars_of(self.body)) | frozenset(vars_of(a for h in self.head for a in h))

    @property
    def is_conjunctive(self) -> bool:
        return len(self.head) == 1

    @property
    def is_datalog(self) -> bool:
        return not self.all_existentials

    def predicates(self) -> set:
        return preds_of(self.body) | {a.predicate for h in self.head for a in h}

    def renamed(self, sub: Map[Variable, Term]) -> "DisjunctiveRule":
        s = Substitution(sub)
        return DisjunctiveRule(tuple(map(s.atom, self.body)),
                               tuple(tuple(map(s.atom, h)) for h in self.head), self.name)

    def fresh_copy(self, source: Optional[VariableSource] = None) -> "DisjunctiveRule":
        ren = {v: fresh_variable(v.name, source) for v in ordered_vars(self.body + sum(self.head, ()))}
        return self.renamed(ren)

    def __repr__(self):
        body = ", ".join(map(repr, self.body))
        head = " | ".join(", ".join(map(repr, h)) for h in self.head)
        prefix = f"{self.name}: " if self.name else ""
        return f"{prefix}{body} -> {head}"


class RuleSet(tuple):
    """Tuple of rules whose variable sets are pairwise disjoint."""

    def __new__(cls, rules: Iterable[DisjunctiveRule] = ()):
        seen = set()
        out = []
        for r in rules:
            if r.variables & seen:
                r = r.fresh_copy()
            seen |= r.variables
            out.append(r)
        return super().__new__(cls, out)

    @property
    def is_datalog(self) -> bool:
        return all(r.is_datalog for r in self)

    @property
    def is_conjunctive(self) -> bool:
        return all(r.is_conjunctive for r in self)

    def by_name(self, name: str) -> DisjunctiveRule:
        for r in self:
            if r.name == name:
                return r
        raise KeyError(name)

    def predicates(self) -> set:
        return set().union(*(r.predicates() for r in self)) if self else set()


@dataclass(frozen=True)
class Mapping:
    """Source-to-target rule set."""

    rules: RuleSet
    source: FrozenSet[Predicate]
    target: FrozenSet[Predicate]

    def __post_init__(self):
        object.__setattr__(self, "rules", RuleSet(self.rules))
        object.__setattr__(self, "source", frozenset(self.source))
        object.__setattr__(self, "target", frozenset(self.target))
        if self.source & self.target:
            raise ValueError("source and target predicates must be disjoint")
        for r in self.rules:
            if not preds_of(r.body) <= self.source:
                raise ValueError(f"rule {r!r}: body uses non-source predicates")
            if not all(preds_of(h) <= self.target for h in r.head):
                raise ValueError(f"rule {r!r}: head uses non-target predicates")


def rule(body: Iterable[Atom], *head: Iterable[Atom], name: Optional[str] = None) -> DisjunctiveRule:
    return DisjunctiveRule(tuple(body), tuple(tuple(h) for h in head), name)


def iter_cqs(ucq: Iterable[CQ]) -> Iterator[CQ]:
    return iter(sorted_cqs(ucq))

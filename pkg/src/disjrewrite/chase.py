"""The disjunctive chase: triggers, α∨ and derivation trees."""
from __future__ import annotations

import time
from collections import deque
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .homomorphism import entails_some, homomorphism, homomorphisms
from .model import (Atom, AtomSet, DisjunctiveRule, RuleSet, Substitution, Variable,
                    fresh_variable, ordered_vars, term_key)

ENTAILED = "entailed"
NOT_ENTAILED = "not_entailed"
UNKNOWN = "unknown"


@dataclass(frozen=True)
class Trigger:
    rule: DisjunctiveRule
    hom: Substitution = field(compare=False)
    rule_index: int = 0
    image: Tuple = ()

    @classmethod
    def make(cls, rule: DisjunctiveRule, hom, rule_index: int = 0) -> "Trigger":
        hom = Substitution({v: hom[v] for v in ordered_vars(rule.body)})
        return cls(rule, hom, rule_index, tuple(hom.values()))

    @property
    def key(self):
        return (self.rule_index, self.image)

    def is_valid_on(self, f: Iterable[Atom]) -> bool:
        f = f if isinstance(f, (set, frozenset)) else set(f)
        return set(self.rule.body_vars) <= set(self.hom) and all(self.hom.atom(a) in f for a in self.rule.body)

    def __repr__(self):
        name = self.rule.name or f"R{self.rule_index}"
        return f"{name}[{', '.join(f'{v!r}->{t!r}' for v, t in self.hom.items())}]"


def find_triggers(f: Iterable[Atom], r: DisjunctiveRule, rule_index: int = 0) -> List[Trigger]:
    """Every homomorphism of the body into f, sorted by image tuple."""
    f = frozenset(f)
    seen = {}
    for h in homomorphisms(r.body, f):
        t = Trigger.make(r, h, rule_index)
        seen.setdefault(t.image, t)
    return [seen[k] for k in sorted(seen, key=lambda img: tuple(term_key(x) for x in img))]


def is_satisfied(t: Trigger, f: Iterable[Atom]) -> bool:
    """Some disjunct maps into f by an extension of the trigger's homomorphism."""
    f = frozenset(f)
    return any(homomorphism(head, f, partial=t.hom) is not None for head in t.rule.head)


def _null(z: Variable) -> Variable:
    v = fresh_variable()
    v.name = f"N{v.id}"
    return v


def apply_trigger(f: Iterable[Atom], t: Trigger) -> List[AtomSet]:
    """α∨: one extension of f per head disjunct, existentials renamed fresh."""
    f = frozenset(f)
    if not t.is_valid_on(f):
        raise ValueError(f"trigger {t!r} does not map the body into the fact base")
    out = []
    for i, head in enumerate(t.rule.head):
        ext = Substitution(t.hom)
        for z in ordered_vars(head):
            if z not in ext:
                ext[z] = _null(z)
        out.append(f | ext.atoms(head))
    return out


@dataclass
class Node:
    id: int
    label: AtomSet
    depth: int
    parent: Optional[int] = None
    trigger: Optional[Trigger] = None
    children: List[int] = field(default_factory=list)
    state: str = "open"        # open | closed | saturated | expanded


@dataclass
class DerivationTree:
    nodes: List[Node]
    restricted: bool = True
    exhausted: bool = False

    @property
    def root(self) -> Node:
        return self.nodes[0]

    def leaves(self) -> List[Node]:
        return [n for n in self.nodes if not n.children]

    def open_leaves(self) -> List[Node]:
        return [n for n in self.nodes if n.state == "open"]

    @property
    def depth(self) -> int:
        return max(n.depth for n in self.nodes)

    def is_saturated(self) -> bool:
        return all(n.state in ("saturated", "closed") for n in self.leaves())

    def check(self) -> bool:
        """Re-verify that every child label is the stored α∨ output and labels grow."""
        for n in self.nodes:
            if not n.children:
                continue
            if n.trigger is None or not n.trigger.is_valid_on(n.label):
                return False
            if len(n.children) != len(n.trigger.rule.head):
                return False
            for i, c in enumerate(n.children):
                child = self.nodes[c]
                if not n.label <= child.label:
                    return False
                if not any(self._is_alpha_image(n, i, h, child.label)
                           for h in homomorphisms(n.trigger.rule.head[i], child.label, partial=n.trigger.hom)):
                    return False
        return True

    @staticmethod
    def _is_alpha_image(n: Node, i: int, h: Substitution, label) -> bool:
        head = n.trigger.rule.head[i]
        fresh = [h[z] for z in ordered_vars(head) if z not in n.trigger.hom]
        old_terms = {t for a in n.label for t in a.args}
        if len(set(fresh)) != len(fresh) or any(not isinstance(x, Variable) or x in old_terms for x in fresh):
            return False
        return n.label | h.atoms(head) == label


@dataclass
class ChaseBudget:
    max_depth: int = 20
    max_nodes: int = 20000
    restricted: bool = True

    def __post_init__(self):
        if self.max_depth <= 0 or self.max_nodes <= 0:
            raise ValueError("chase budgets must be positive")


@dataclass
class ChaseVerdict:
    status: str
    tree: DerivationTree
    elapsed: float = 0.0

    @property
    def entailed(self) -> bool:
        return self.status == ENTAILED

    def stats(self) -> Dict[str, int]:
        return {"nodes": len(self.tree.nodes), "depth": self.tree.depth,
                "open_leaves": len(self.tree.open_leaves())}


def expand_chase(f: Iterable[Atom], rules: Iterable[DisjunctiveRule], budget: Optional[ChaseBudget] = None,
                 query=None) -> DerivationTree:
    """Breadth-first derivation tree; each branch applies its triggers in discovery order.

    With ``query`` (a UCQ) leaves entailing it are closed, and expansion
    stops at the first saturated leaf that does not.
    """
    budget = budget or ChaseBudget()
    rules = RuleSet(rules)
    root = Node(0, frozenset(f), 0)
    nodes = [root]
    tree = DerivationTree(nodes, budget.restricted)
    # per-node pending triggers and keys already discovered on the branch
    pending: Dict[int, deque] = {0: deque()}
    known: Dict[int, set] = {0: set()}
    frontier = deque([0])
    while frontier:
        n = nodes[frontier.popleft()]
        if query is not None and entails_some(n.label, query):
            n.state = "closed"
            continue
        queue, keys = pending.pop(n.id), known.pop(n.id)
        for i, r in enumerate(rules):
            for t in find_triggers(n.label, r, i):
                if t.key not in keys:
                    keys.add(t.key)
                    queue.append(t)
        chosen = None
        while queue:
            t = queue.popleft()
            if budget.restricted and is_satisfied(t, n.label):
                continue
            chosen = t
            break
        if chosen is None:
            n.state = "saturated"
            if query is not None:
                break
            continue
        if n.depth >= budget.max_depth or len(nodes) + len(chosen.rule.head) > budget.max_nodes:
            queue.appendleft(chosen)
            pending[n.id], known[n.id] = queue, keys
            tree.exhausted = True
            continue
        n.trigger = chosen
        n.state = "expanded"
        for label in apply_trigger(n.label, chosen):
            c = Node(len(nodes), label, n.depth + 1, n.id)
            nodes.append(c)
            n.children.append(c.id)
            pending[c.id] = deque(queue)
            known[c.id] = set(keys)
            frontier.append(c.id)
    return tree


def chase_entails(f: Iterable[Atom], rules: Iterable[DisjunctiveRule], q, budget: Optional[ChaseBudget] = None
                  ) -> ChaseVerdict:
    start = time.monotonic()
    q = [frozenset(c) for c in q]
    tree = expand_chase(f, rules, budget, query=q)
    leaves = tree.leaves()
    if any(n.state == "saturated" for n in leaves):
        status = NOT_ENTAILED
    elif all(n.state == "closed" for n in leaves):
        status = ENTAILED
    else:
        status = UNKNOWN
    return ChaseVerdict(status, tree, time.monotonic() - start)


def entailed_within(f: Iterable[Atom], rules: Sequence[DisjunctiveRule], q, depth: int,
                    limit: Optional[List[int]] = None) -> bool:
    """Some derivation tree of depth ≤ ``depth`` has every leaf entailing q.

    Exhaustive AND-OR search over triggers.  Satisfied triggers are
    skipped: their outputs are equivalent to the fact base itself.
    ``limit`` is a one-element countdown of trigger applications; the
    search raises RuntimeError when it runs out.
    """
    f = frozenset(f)
    q = [frozenset(c) for c in q]
    if entails_some(f, q):
        return True
    if depth <= 0:
        return False
    for i, r in enumerate(rules):
        for t in find_triggers(f, r, i):
            if is_satisfied(t, f):
                continue
            if limit is not None:
                limit[0] -= 1
                if limit[0] < 0:
                    raise RuntimeError("bounded entailment search exceeded its limit")
            if all(entailed_within(g, rules, q, depth - 1, limit) for g in apply_trigger(f, t)):
                return True
    return False


def derivation_results(f: Iterable[Atom], rules: Sequence[DisjunctiveRule], k: int) -> List[List[AtomSet]]:
    """Every result (list of leaf fact bases) of every derivation of length ≤ k.

    Length counts trigger applications, so each result is that of a tree
    of depth ≤ k.  Exponential; keep k and the instance tiny.
    """
    start = [frozenset(f)]
    out = [start]
    layer = [start]
    for _ in range(k):
        nxt = []
        for leaves in layer:
            for j, leaf in enumerate(leaves):
                for i, r in enumerate(rules):
                    for t in find_triggers(leaf, r, i):
                        nxt.append(leaves[:j] + apply_trigger(leaf, t) + leaves[j + 1:])
        out.extend(nxt)
        layer = nxt
    return out

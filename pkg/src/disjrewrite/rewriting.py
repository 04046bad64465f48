"""Piece-unifiers, disjunctive piece-unifiers and breadth-first UCQ rewriting."""
from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Tuple

from .homomorphism import cover, cq_entails, remove_more_specific
from .model import (CQ, UCQ, Atom, Constant, DisjunctiveRule, Mapping, Predicate,
                    Substitution, Variable, canonical_cq, fresh_variable, preds_of, safe_copy,
                    sorted_atoms, sorted_cqs, vars_of)
from .partition import TermPartition, UnionFind, join_partitions

COMPLETE = "complete"
BUDGET_EXHAUSTED = "budget_exhausted"


class InvalidQuery(ValueError):
    pass


@dataclass(frozen=True)
class PieceUnifier:
    """(Q', H', P) for one CQ and one head disjunct of a rule."""

    query: CQ
    q_sub: FrozenSet[Atom]
    rule: DisjunctiveRule
    disjunct: int
    h_sub: FrozenSet[Atom]
    partition: TermPartition

    def separating(self) -> set:
        return vars_of(self.q_sub) & vars_of(self.query - self.q_sub)

    def is_valid(self) -> bool:
        """Re-check the defining conditions from scratch."""
        if not self.q_sub or not self.q_sub <= self.query:
            return False
        if not self.h_sub <= frozenset(self.rule.head[self.disjunct]):
            return False
        if vars_of(self.query) & self.rule.variables:
            return False
        if not self.partition.is_admissible():
            return False
        universe = {t for a in self.q_sub | self.h_sub for t in a.args}
        if self.partition.universe != universe:
            return False
        u = self.partition.substitution(self.rule.variables)
        if u.atoms(self.q_sub) != u.atoms(self.h_sub):
            return False
        return _existential_classes_ok(self.partition.classes, self.rule.existentials(self.disjunct),
                                       vars_of(self.q_sub) - self.separating())

    def renamed(self, sub: Substitution) -> "PieceUnifier":
        return PieceUnifier(sub.atoms(self.query), sub.atoms(self.q_sub), self.rule, self.disjunct,
                            self.h_sub, self.partition.renamed(sub))


def _existential_classes_ok(classes, existentials, allowed_query_vars) -> bool:
    for c in classes:
        if c & existentials:
            z = next(iter(c & existentials))
            if any(t != z and t not in allowed_query_vars for t in c):
                return False
    return True


@dataclass(frozen=True)
class DisjunctivePieceUnifier:
    rule: DisjunctiveRule
    parts: Tuple[PieceUnifier, ...]
    joined: TermPartition
    sources: Tuple[CQ, ...] = field(default=(), compare=False)

    def is_valid(self) -> bool:
        if len(self.parts) != len(self.rule.head):
            return False
        if any(p.disjunct != i or p.rule != self.rule or not p.is_valid() for i, p in enumerate(self.parts)):
            return False
        for a, b in itertools.combinations(self.parts, 2):
            if vars_of(a.query) & vars_of(b.query):
                return False
        return self.joined == join_partitions(p.partition for p in self.parts) and self.joined.is_admissible()


# --- conjunctive piece-unifiers ------------------------------------------

def enumerate_piece_unifiers(q: Iterable[Atom], rule: DisjunctiveRule, disjunct_index: int,
                             single_piece: bool = False,
                             required: FrozenSet[Predicate] = frozenset()) -> List[PieceUnifier]:
    """All most general piece-unifiers of q with ``body -> head[disjunct_index]``.

    Every nonempty Q' ⊆ q and every predicate-respecting assignment of the
    atoms of Q' to head atoms is tried; the partition is the finest one
    unifying each pair.  Any piece-unifier is a coarsening of one of these
    with the same Q', so nothing is lost for rewriting.  Q' may unify
    several of its atoms with the same head atom.

    Atoms whose predicate is in ``required`` are forced into Q'.
    """
    q = frozenset(q)
    head = rule.head[disjunct_index]
    existentials = rule.existentials(disjunct_index)
    qvars = vars_of(q)
    if qvars & rule.variables:
        raise ValueError("query shares variables with the rule; pass a safe copy")
    head_by_pred: Dict[Predicate, List[Atom]] = {}
    for h in head:
        head_by_pred.setdefault(h.predicate, []).append(h)
    if any(a.predicate in required and a.predicate not in head_by_pred for a in q):
        return []
    cands = [a for a in sorted_atoms(q) if a.predicate in head_by_pred]
    results: Dict[tuple, PieceUnifier] = {}

    def bad_class(members) -> bool:
        consts = [t for t in members if isinstance(t, Constant)]
        if len(consts) > 1:
            return True
        zs = [t for t in members if t in existentials]
        if zs:
            # an existential may only meet query variables
            return any(t != zs[0] and t not in qvars for t in members)
        return False

    def search(k: int, parent: Dict, chosen: List[Tuple[Atom, Atom]]):
        if k == len(cands):
            if chosen:
                emit(parent, chosen)
            return
        a = cands[k]
        if a.predicate not in required:
            search(k + 1, parent, chosen)
        for h in head_by_pred[a.predicate]:
            uf = UnionFind()
            uf.parent = dict(parent)
            ok = True
            for s, t in zip(a.args, h.args):
                uf.union(s, t)
            # check only the classes touched by this pair
            groups = {}
            roots = {uf.find(x) for x in a.args + h.args}
            for x in uf.parent:
                r = uf.find(x)
                if r in roots:
                    groups.setdefault(r, []).append(x)
            if any(bad_class(g) for g in groups.values()):
                ok = False
            if ok:
                search(k + 1, uf.parent, chosen + [(a, h)])

    def emit(parent: Dict, chosen):
        q_sub = frozenset(a for a, _ in chosen)
        h_sub = frozenset(h for _, h in chosen)
        uf = UnionFind()
        uf.parent = dict(parent)
        for a in q_sub | h_sub:
            for t in a.args:
                uf.add(t)
        partition = TermPartition(uf.classes())
        separating = vars_of(q_sub) & vars_of(q - q_sub)
        if not _existential_classes_ok(partition.classes, existentials, vars_of(q_sub) - separating):
            return
        if single_piece and not _is_single_piece(q_sub, partition, existentials):
            return
        key = (q_sub, h_sub, partition)
        if key not in results:
            results[key] = PieceUnifier(q, q_sub, rule, disjunct_index, h_sub, partition)

    search(0, {}, [])
    return list(results.values())


def _is_single_piece(q_sub, partition, existentials) -> bool:
    """Q' is one atom, or its atoms are linked through existentially unified variables."""
    atoms = sorted_atoms(q_sub)
    if len(atoms) == 1:
        return True
    glue = set()
    for c in partition.classes:
        if c & existentials:
            glue |= {t for t in c if isinstance(t, Variable)}
    uf = UnionFind(range(len(atoms)))
    for i, j in itertools.combinations(range(len(atoms)), 2):
        if set(atoms[i].args) & set(atoms[j].args) & glue:
            uf.union(i, j)
    return len(uf.classes()) == 1


# --- disjunctive piece-unifiers ------------------------------------------

@lru_cache(maxsize=1 << 14)
def _templates(cq: CQ, rule: DisjunctiveRule, i: int, single_piece: bool, required: FrozenSet[Predicate]):
    copy, _ = safe_copy(cq)
    unifiers = enumerate_piece_unifiers(copy, rule, i, single_piece, required)
    qvars = vars_of(copy)
    sigs = []
    for pu in unifiers:
        sig = []
        for c in pu.partition.classes:
            rule_terms = frozenset(t for t in c if isinstance(t, Variable) and t not in qvars)
            if rule_terms:
                sig.append((rule_terms, frozenset(t for t in c if isinstance(t, Constant))))
        sigs.append(tuple(sig))
    return copy, qvars, tuple(unifiers), tuple(sigs)


def _join_admissible(sigs) -> bool:
    """Admissibility of the join, decided on the rule-variable skeleton only."""
    uf = UnionFind()
    consts: Dict = {}
    for sig in sigs:
        for rule_terms, cs in sig:
            it = iter(rule_terms)
            first = next(it)
            uf.add(first)
            for t in it:
                uf.union(first, t)
            if cs:
                consts.setdefault(first, set()).update(cs)
    merged: Dict = {}
    for x, cs in consts.items():
        bucket = merged.setdefault(uf.find(x), set())
        bucket |= cs
        if len(bucket) > 1:
            return False
    return True


def enumerate_disjunctive_piece_unifiers(q: Iterable[CQ], rule: DisjunctiveRule,
                                         new_filter: Optional[Iterable[CQ]] = None,
                                         single_piece: bool = False,
                                         required: FrozenSet[Predicate] = frozenset()
                                         ) -> Iterator[DisjunctivePieceUnifier]:
    """One piece-unifier per head disjunct, each on its own fresh safe copy.

    With ``new_filter`` only combinations using at least one CQ of that set
    are produced.  ``required`` is passed on to the conjunctive enumeration.
    """
    cqs = sorted_cqs(set(q))
    new = set(new_filter) if new_filter is not None else None
    per_disjunct = []
    for i in range(len(rule.head)):
        options = []
        for cq in cqs:
            copy, qvars, unifiers, sigs = _templates(cq, rule, i, single_piece, required)
            for pu, sig in zip(unifiers, sigs):
                options.append((cq, qvars, pu, sig))
        if not options:
            return
        per_disjunct.append(options)
    for combo in itertools.product(*per_disjunct):
        if new is not None and not any(c[0] in new for c in combo):
            continue
        if not _join_admissible([c[3] for c in combo]):
            continue
        parts = []
        for cq, qvars, pu, _ in combo:
            ren = Substitution({v: fresh_variable(v.name) for v in sorted(qvars, key=lambda v: v.id)})
            parts.append(pu.renamed(ren))
        joined = join_partitions(p.partition for p in parts)
        yield DisjunctivePieceUnifier(rule, tuple(parts), joined, tuple(c[0] for c in combo))


def apply_beta(mu: DisjunctivePieceUnifier) -> CQ:
    """u(B) ∪ ⋃ u(Q_i \\ Q'_i) with u associated with the joined partition."""
    u = mu.joined.substitution(mu.rule.variables)
    out = set(u.atoms(mu.rule.body))
    for p in mu.parts:
        out |= u.atoms(p.query - p.q_sub)
    return frozenset(out)


def one_step_rewritings(q: Iterable[CQ], rules: Iterable[DisjunctiveRule],
                        new_filter: Optional[Iterable[CQ]] = None,
                        single_piece: bool = False,
                        required: FrozenSet[Predicate] = frozenset()) -> Iterator[CQ]:
    q = list(q)
    for r in rules:
        for mu in enumerate_disjunctive_piece_unifiers(q, r, new_filter, single_piece, required):
            yield canonical_cq(apply_beta(mu))


def w_step(q: Iterable[CQ], rules: Iterable[DisjunctiveRule]) -> UCQ:
    """W_i from W_{i-1}: the input plus every one-step β∨ result (no pruning)."""
    q = frozenset(q)
    return q | frozenset(one_step_rewritings(q, rules))


def w_iterates(q: Iterable[CQ], rules: Iterable[DisjunctiveRule], n: int) -> List[UCQ]:
    """[W_0, ..., W_n]."""
    out = [frozenset(canonical_cq(c) for c in q)]
    for _ in range(n):
        out.append(w_step(out[-1], rules))
    return out


# --- breadth-first rewriting loop ------------------------------------------

@dataclass
class Budget:
    max_iterations: int = 10
    max_cq_atoms: int = 24
    max_generated: int = 100000
    time_limit: Optional[float] = None

    def __post_init__(self):
        for name in ("max_iterations", "max_cq_atoms", "max_generated"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.time_limit is not None and self.time_limit <= 0:
            raise ValueError("time_limit must be positive")


@dataclass
class RewritingOutcome:
    """Result of a rewriting run.

    ``history[i]`` is Q* after iteration i (index 0: the initial cover) and
    ``generated[i]`` the raw β∨ output of iteration i+1, both only when
    requested.
    """

    status: str
    result: UCQ
    iterations: int
    generated_count: int
    elapsed: float
    history: List[UCQ] = field(default_factory=list, repr=False)
    generated: List[FrozenSet[CQ]] = field(default_factory=list, repr=False)
    truncated: bool = False

    @property
    def complete(self) -> bool:
        return self.status == COMPLETE

    def cqs(self) -> List[CQ]:
        return sorted_cqs(self.result)


def rewrite(q: Iterable[CQ], rules: Iterable[DisjunctiveRule], budget: Optional[Budget] = None,
            single_piece: bool = False, keep_history: bool = False,
            keep_generated: bool = False) -> RewritingOutcome:
    """Breadth-first rewriting with cover-based pruning."""
    return _breadth_first(q, rules, budget, single_piece, keep_history, keep_generated)


def source_reachable(q: Iterable[CQ], rules: Iterable[DisjunctiveRule],
                     source: FrozenSet[Predicate], max_states: int = 1 << 12) -> bool:
    """Whether rewriting q could ever produce a CQ over ``source`` alone.

    Abstract interpretation on the sets of non-source predicates of CQs.
    A β∨ step over parts with abstract states S_i yields a state between
    ∪(S_i minus preds(H_i)) and ∪ S_i (plus the body's non-source
    predicates), and part i needs S_i to meet preds(H_i).  If the empty
    state is unreachable, no future CQ is pure-source.  Answers True
    (cannot rule it out) when the state space is too large.
    """
    rules = list(rules)
    states = {frozenset(p for p in preds_of(c) if p not in source) for c in q}
    if frozenset() in states:
        return True
    shapes = []
    for r in rules:
        body = frozenset(p for p in preds_of(r.body) if p not in source)
        shapes.append((body, [frozenset(preds_of(h)) for h in r.head]))
    while True:
        added = set()
        for body, heads in shapes:
            usable = [[st for st in states if st & hp] for hp in heads]
            for combo in itertools.product(*usable):
                lo = body.union(*(st - hp for st, hp in zip(combo, heads)))
                hi = body.union(*combo)
                extra = sorted(hi - lo)
                if len(extra) > 12:
                    return True
                for k in range(len(extra) + 1):
                    for sub in itertools.combinations(extra, k):
                        z = lo | frozenset(sub)
                        if not z:
                            return True
                        if z not in states:
                            added.add(z)
                if len(states) + len(added) > max_states:
                    return True
        if not added:
            return False
        states |= added


def _breadth_first(q, rules, budget, single_piece, keep_history, keep_generated,
                   project: Optional[FrozenSet[Predicate]] = None) -> RewritingOutcome:
    budget = budget or Budget()
    rules = list(rules)
    start = time.monotonic()
    q_new = cover(canonical_cq(c) for c in q)
    q_star = q_new
    history = [q_star] if keep_history else []
    generated_sets: List[FrozenSet[CQ]] = []
    iterations = 0
    generated = 0
    truncated = False
    exhausted = False
    while q_new:
        if project is not None and not source_reachable(q_star, rules, project):
            # the source projection of Q* can no longer change
            break
        if iterations >= budget.max_iterations:
            exhausted = True
            break
        if budget.time_limit is not None and time.monotonic() - start > budget.time_limit:
            exhausted = True
            break
        iterations += 1
        q_prev = q_new
        last = project is not None and iterations == budget.max_iterations
        if last:
            # Only CQs over the projection predicates can survive the final
            # filter, and only they can generalize one another.
            required = frozenset().union(*(r.predicates() for r in rules)) - project
            stream = one_step_rewritings(q_star, rules, q_prev, single_piece, required)
        else:
            stream = one_step_rewritings(q_star, rules, q_prev, single_piece)
        produced = set()
        for cq in stream:
            generated += 1
            if len(cq) > budget.max_cq_atoms:
                truncated = True
            else:
                produced.add(cq)
            if generated >= budget.max_generated:
                exhausted = True
                break
        if keep_generated:
            generated_sets.append(frozenset(produced))
        q_new = cover(produced)
        q_new = remove_more_specific(q_new, q_star)
        q_star = remove_more_specific(q_star, q_new)
        q_star = q_star | q_new
        if last and not q_new and not exhausted and not truncated:
            # the unrestricted step would have been empty iff every CQ it
            # produces is more specific than Q*
            for cq in one_step_rewritings(q_star, rules, q_prev, single_piece):
                if len(cq) > budget.max_cq_atoms or not any(cq_entails(cq, b) for b in q_star):
                    q_new = frozenset([cq])
                    break
        if keep_history:
            history.append(q_star)
        if exhausted:
            break
    status = BUDGET_EXHAUSTED if (exhausted or truncated) else COMPLETE
    return RewritingOutcome(status, q_star, iterations, generated, time.monotonic() - start,
                            history, generated_sets, truncated)


def s_rewrite(q: Iterable[CQ], m: Mapping, budget: Optional[Budget] = None,
              single_piece: bool = False, keep_history: bool = False) -> RewritingOutcome:
    """Rewrite with the mapping rules, then keep only CQs over source predicates.

    The run also halts Complete as soon as no pure-source CQ can be
    derived any more from Q*; its source projection is then final.

    The result and history are projected onto the source predicates.  On
    the last permitted iteration only source-only CQs are generated; the
    projection and the status are the same as for the unrestricted run.
    """
    q = list(q)
    for cq in q:
        if preds_of(cq) & m.source:
            raise InvalidQuery("query mentions source predicates")
    out = _breadth_first(q, m.rules, budget, single_piece, keep_history, False, frozenset(m.source))
    out.result = frozenset(c for c in out.result if preds_of(c) <= m.source)
    out.history = [frozenset(c for c in h if preds_of(c) <= m.source) for h in out.history]
    return out

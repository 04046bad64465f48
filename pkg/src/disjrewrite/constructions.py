"""Executable constructions: the non-rewritable query family, the mapping
reduction from datalog rewriting, the reverse function and datalog unfolding.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

from .chase import ChaseBudget, chase_entails
from .homomorphism import cq_equivalent, freeze, homomorphism, isomorphic
from .model import (CQ, UCQ, Atom, Constant, DisjunctiveRule, Mapping, Predicate, RuleSet,
                    Substitution, Variable, canonical_cq, fresh_variable,
                    preds_of, rule, safe_copy, sorted_atoms, vars_of)
from .partition import TermPartition, UnionFind, join_partitions
from .rewriting import DisjunctivePieceUnifier, PieceUnifier, apply_beta, one_step_rewritings, w_iterates


class ConstructionError(ValueError):
    pass


class Disconnected(ConstructionError):
    """Some head disjunct shares no variable with the body."""


class ConjunctiveEquivalent(ConstructionError):
    """One disjunct implies the other given the body, so the rule is conjunctive in disguise."""


class InvalidInput(ConstructionError):
    pass


class TooManySpecialAtoms(ConstructionError):
    pass


class UnknownSpecialPredicate(ConstructionError):
    pass


# --- the non-rewritable query family ------------------------------------

def _check_nonfus_rule(r: DisjunctiveRule) -> None:
    if len(r.head) != 2:
        raise InvalidInput(f"rule {r.name or r!r} must have exactly two disjuncts")
    for i in (0, 1):
        if not r.disjunct_frontier(i):
            raise Disconnected(f"disjunct {i + 1} of {r.name or r!r} has an empty frontier")
    # H_i maps into B ∪ H_j fixing the body: B -> H_j alone is equivalent to r
    fixed = Substitution({v: v for v in r.body_vars})
    for i, j in ((0, 1), (1, 0)):
        if homomorphism(r.head[i], frozenset(r.body) | frozenset(r.head[j]), partial=fixed) is not None:
            raise ConjunctiveEquivalent(
                f"disjunct {i + 1} of {r.name or r!r} follows from the body and disjunct {j + 1}")


def _link_predicate(r: DisjunctiveRule) -> Predicate:
    arity = len(r.disjunct_frontier(0)) + len(r.disjunct_frontier(1))
    taken = {p.name for p in r.predicates()}
    name = f"link_{r.name or 'rule'}"
    base, k = name, 1
    while name in taken:
        k += 1
        name = f"{base}{k}"
    return Predicate(name, arity)


@dataclass(frozen=True)
class _Member:
    """A family CQ with the isomorphisms from H1, H2 onto its end copies."""

    atoms: CQ
    h1: Substitution
    h2: Substitution


def _base_member(r: DisjunctiveRule) -> _Member:
    link = _link_predicate(r)
    h1, s1 = safe_copy(r.head[0])
    h2, s2 = safe_copy(r.head[1])
    args = tuple(s1[v] for v in r.disjunct_frontier(0)) + tuple(s2[v] for v in r.disjunct_frontier(1))
    return _Member(frozenset(h1) | frozenset(h2) | {Atom(link, args)}, s1, s2)


def _iso_partition(head: Sequence[Atom], iso: Substitution) -> TermPartition:
    consts = {t for a in head for t in a.args if isinstance(t, Constant)}
    return TermPartition([{v, iso[v]} for v in vars_of(head)] + [{c} for c in consts])


def _next_member(r: DisjunctiveRule, first: _Member, prev: _Member) -> Tuple[_Member, DisjunctivePieceUnifier]:
    """Unify H1 in a copy of ``first`` and H2 in a copy of ``prev``."""
    parts, isos = [], []
    for i, (m, keep) in enumerate(((first, "h2"), (prev, "h1"))):
        q, ren = safe_copy(m.atoms)
        iso = m.h1 if i == 0 else m.h2
        iso = Substitution({v: ren.term(t) for v, t in iso.items()})
        q_sub = iso.atoms(r.head[i])
        parts.append(PieceUnifier(q, q_sub, r, i, frozenset(r.head[i]), _iso_partition(r.head[i], iso)))
        other = getattr(m, keep)
        isos.append(Substitution({v: ren.term(t) for v, t in other.items()}))
    joined = join_partitions(p.partition for p in parts)
    mu = DisjunctivePieceUnifier(r, tuple(parts), joined)
    u = joined.substitution(r.variables)
    atoms = apply_beta(mu)
    h2 = Substitution({v: u.term(t) for v, t in isos[0].items()})
    h1 = Substitution({v: u.term(t) for v, t in isos[1].items()})
    return _Member(atoms, h1, h2), mu


def build_nonfus_query(r: DisjunctiveRule) -> CQ:
    """Q = H1 copy, link(v1, v2), H2 copy, joined by a fresh predicate.

    The link arguments are the frontier of H1 then the frontier of H2, each
    in first-occurrence order.
    """
    _check_nonfus_rule(r)
    return canonical_cq(_base_member(r).atoms)


def build_nonfus_family(r: DisjunctiveRule, k: int) -> List[CQ]:
    """[Q_0, ..., Q_k], where Q_i chains i copies of the body between the ends.

    Q_i is the β∨ image of the disjunctive piece-unifier that glues H1 in a
    copy of Q_0 and H2 in a copy of Q_{i-1}, each through its isomorphism
    with the head disjunct.
    """
    if k < 0:
        raise ValueError("k must be non-negative")
    _check_nonfus_rule(r)
    first = _base_member(r)
    members = [first]
    for _ in range(k):
        m, mu = _next_member(r, first, members[-1])
        if not mu.is_valid():
            raise AssertionError("family step is not a disjunctive piece-unifier")
        members.append(m)
    return [canonical_cq(m.atoms) for m in members]


# --- the mapping reduction -------------------------------------------------

T_PREDICATE = "tt_T"


def _hat_name(name: str) -> str:
    return "hat_T" if name == T_PREDICATE else f"hat_{name}"


@dataclass(frozen=True)
class ReducedRule:
    rule: DisjunctiveRule
    special: Predicate
    query: CQ
    mapping_rule: DisjunctiveRule


@dataclass(frozen=True)
class ReductionOutput:
    query: CQ                       # the original q
    rules: RuleSet
    query_q: CQ                     # Q_Q
    reduced: Tuple[ReducedRule, ...]
    trans: RuleSet                  # p(x) -> hat_p(x) for each source predicate
    mapping: Mapping
    hats: Dict[Predicate, Predicate]

    @property
    def ucq(self) -> UCQ:
        return frozenset([self.query_q]) | frozenset(e.query for e in self.reduced)

    @property
    def source(self) -> frozenset:
        return self.mapping.source

    def unhat(self) -> Dict[Predicate, Predicate]:
        return {h: p for p, h in self.hats.items()}

    def by_special(self, p: Predicate) -> ReducedRule:
        for e in self.reduced:
            if e.special == p:
                return e
        raise UnknownSpecialPredicate(f"{p!r} is not a special predicate of this reduction")

    def named_queries(self) -> Tuple[Tuple[str, CQ], ...]:
        return (("q_Q", self.query_q),) + tuple((f"q_{e.rule.name}", e.query) for e in self.reduced)


def _with_t(atoms: Iterable[Atom], t_pred: Predicate) -> frozenset:
    atoms = frozenset(atoms)
    terms = {t for a in atoms for t in a.args}
    return atoms | {Atom(t_pred, (t,)) for t in terms}


def _hatted(atoms: Iterable[Atom], hats: Dict[Predicate, Predicate]) -> frozenset:
    return frozenset(Atom(hats[a.predicate], a.args) for a in atoms)


def build_reduction(q: Iterable[Atom], rules: Iterable[DisjunctiveRule]) -> ReductionOutput:
    """The UCQ {Q_Q} ∪ {Q_Ri} and mapping M_R ∪ M_trans built from q and datalog rules."""
    q = frozenset(q)
    named = []
    for i, r in enumerate(rules):
        if not r.is_conjunctive or not r.is_datalog or len(r.head[0]) != 1:
            raise InvalidInput(f"rule {r.name or i} must be datalog with an atomic head")
        if any(isinstance(t, Constant) for a in r.body + r.head[0] for t in a.args):
            raise InvalidInput(f"rule {r.name or i} contains a constant")
        named.append(r if r.name else DisjunctiveRule(r.body, r.head, f"r{i + 1}"))
    rules = RuleSet(named)
    if len({r.name for r in rules}) != len(rules):
        raise InvalidInput("rule names must be distinct")
    t_pred = Predicate(T_PREDICATE, 1)
    source = preds_of(q) | rules.predicates() | {t_pred}
    if any(p.name.startswith(("hat_", "pr_")) or (p.name == T_PREDICATE and p != t_pred)
           for p in source - {t_pred}):
        raise InvalidInput("predicate names clash with reduction predicates")
    hats = {p: Predicate(_hat_name(p.name), p.arity) for p in sorted(source)}
    query_q = _hatted(_with_t(q, t_pred), hats)
    reduced, m_rules = [], []
    for r in rules:
        fr = r.frontier
        special = Predicate(f"pr_{r.name}", len(fr))
        qr = _hatted(_with_t(r.body, t_pred), hats) | {Atom(special, fr)}
        body = tuple(Atom(t_pred, (x,)) for x in fr)
        m = rule(body, [Atom(special, fr)], [Atom(hats[a.predicate], a.args) for a in r.head[0]],
                 name=f"m_{r.name}")
        reduced.append(ReducedRule(r, special, qr, m))
        m_rules.append(m)
    trans = []
    for p in sorted(source):
        xs = tuple(fresh_variable(f"X{k + 1}") for k in range(p.arity))
        trans.append(rule([Atom(p, xs)], [Atom(hats[p], xs)], name=f"trans_{p.name}"))
    trans = RuleSet(trans)
    target = frozenset(hats.values()) | {e.special for e in reduced}
    mapping = Mapping(RuleSet(m_rules + list(trans)), frozenset(source), target)
    return ReductionOutput(q, rules, query_q, tuple(reduced), trans, mapping, hats)


def _strip(atoms: Iterable[Atom], red: ReductionOutput) -> frozenset:
    """Remove hats, then drop T atoms."""
    unhat = red.unhat()
    out = set()
    for a in atoms:
        p = unhat.get(a.predicate, a.predicate)
        if p.name != T_PREDICATE:
            out.add(Atom(p, a.args))
    return frozenset(out)


def reverse(q: Iterable[Atom], red: ReductionOutput) -> Union[CQ, DisjunctiveRule]:
    """A CQ on the original predicates, or a datalog rule if q has a special atom."""
    q = frozenset(q)
    specials = {e.special for e in red.reduced}
    hatted = set(red.hats) | set(red.hats.values())
    found = [a for a in q if a.predicate in specials]
    unknown = [a for a in q if a.predicate not in specials and a.predicate not in hatted]
    if unknown:
        raise UnknownSpecialPredicate(f"unexpected predicate {unknown[0].predicate!r}")
    if len(found) > 1:
        raise TooManySpecialAtoms(f"{len(found)} special atoms in one CQ")
    if not found:
        return _strip(q, red)
    sp = found[0]
    entry = red.by_special(sp.predicate)
    sub = Substitution(dict(zip(entry.rule.frontier, sp.args)))
    body = _strip(q - {sp}, red)
    head = sub.atoms(entry.rule.head[0])
    return DisjunctiveRule(tuple(sorted_atoms(body)), (tuple(sorted_atoms(head)),), entry.rule.name)


def rules_equivalent(r1: DisjunctiveRule, r2: DisjunctiveRule) -> bool:
    """Same rule up to renaming: mutual homomorphism of body ∪ head, heads tagged apart."""
    return cq_equivalent(_tagged(r1), _tagged(r2))


def _tagged(r: DisjunctiveRule) -> frozenset:
    head = [Atom(Predicate("head:" + a.predicate.name, a.predicate.arity), a.args)
            for h in r.head for a in h]
    return frozenset(r.body) | frozenset(head)


def reduction_spot_check(red: ReductionOutput, iterations: int = 1) -> Tuple[bool, List[CQ]]:
    """Each one-step rewriting Q_w of q has (Q_w)^T among the reduction's W_iterations, modulo hats.

    Returns (ok, missing).
    """
    t_pred = Predicate(T_PREDICATE, 1)
    q = canonical_cq(red.query)
    targets = [_with_t(qw, t_pred) for qw in set(one_step_rewritings([q], red.rules))]
    w = w_iterates(red.ucq, red.mapping.rules, iterations)[-1]
    specials = {e.special for e in red.reduced}
    unhat = red.unhat()
    pool = [frozenset(Atom(unhat.get(a.predicate, a.predicate), a.args) for a in c)
            for c in w if not preds_of(c) & specials]
    missing = [t for t in targets if not any(isomorphic(t, c) for c in pool)]
    return not missing, missing


# --- datalog unfolding ---------------------------------------------------

def _mgu(a: Atom, b: Atom) -> Optional[Substitution]:
    if a.predicate != b.predicate:
        return None
    uf = UnionFind()
    for s, t in zip(a.args, b.args):
        uf.union(s, t)
    sub = Substitution()
    for c in uf.classes():
        consts = [t for t in c if isinstance(t, Constant)]
        if len(consts) > 1:
            return None
        rep = consts[0] if consts else min(c, key=lambda v: v.id)
        for t in c:
            if isinstance(t, Variable) and t != rep:
                sub[t] = rep
    return sub


def unfold(r2: DisjunctiveRule, r1: DisjunctiveRule) -> List[DisjunctiveRule]:
    """Every R2 ∘ R1: resolve one body atom of r2 against the head of r1."""
    r1 = r1.fresh_copy()
    h1 = r1.head[0][0]
    out = []
    for a in r2.body:
        u = _mgu(a, h1)
        if u is None:
            continue
        body = u.atoms(r1.body) | u.atoms(set(r2.body) - {a})
        head = u.atoms(r2.head[0])
        name = f"{r2.name}.{r1.name}" if r2.name and r1.name else None
        out.append(DisjunctiveRule(tuple(sorted_atoms(body)), (tuple(sorted_atoms(head)),), name))
    return out


def unfold_closure(rules: Iterable[DisjunctiveRule], max_compositions: int) -> RuleSet:
    """Rules reachable by at most ``max_compositions`` unfoldings by input rules.

    Duplicates up to renaming are dropped.
    """
    if max_compositions < 0:
        raise ValueError("max_compositions must be non-negative")
    base = list(RuleSet(rules))
    for r in base:
        if not r.is_conjunctive or not r.is_datalog or len(r.head[0]) != 1:
            raise InvalidInput(f"rule {r.name!r} must be datalog with an atomic head")
    closure = list(base)
    layer = list(base)
    for _ in range(max_compositions):
        nxt = []
        for r2 in layer:
            for r1 in base:
                for c in unfold(r2, r1):
                    if not any(rules_equivalent(c, d) for d in closure):
                        closure.append(c)
                        nxt.append(c)
        if not nxt:
            break
        layer = nxt
    return RuleSet(closure)


def rule_entailed(rules: Iterable[DisjunctiveRule], r: DisjunctiveRule,
                  budget: Optional[ChaseBudget] = None) -> bool:
    """rules ⊨ r, tested by chasing the frozen body of r and looking for its frozen head."""
    frozen = freeze(r.body)
    sub = Substitution({v: Constant(f"_v{v.id}") for v in r.body_vars})
    # existential head variables stay variables of the query
    heads = [sub.atoms(h) for h in r.head]
    return chase_entails(frozen, rules, heads, budget).entailed

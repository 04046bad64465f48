"""Random instances and executable checks of the α∨/β∨ correspondence.

Every check enumerates exhaustively at instance scale, so a ``False`` is a
counterexample, not bad luck.  Enumerations stop at ``CAP`` candidates;
instances that hit the cap are regenerated from a derived seed.
"""
from __future__ import annotations

import json
import random
import time
from dataclasses import dataclass, field
from typing import Dict, Iterable, Iterator, List, Optional, Tuple

from .chase import Trigger, apply_trigger, chase_entails, entailed_within, find_triggers
from .homomorphism import entails_some, freeze, maps_to, ucq_entails, ucq_equivalent
from .model import (CQ, UCQ, Atom, AtomSet, Constant, DisjunctiveRule, Predicate, RuleSet,
                    Substitution, Variable, canonical_cq, fresh_variable, safe_copy)
from .rewriting import (Budget, DisjunctivePieceUnifier, apply_beta,
                        enumerate_disjunctive_piece_unifiers, one_step_rewritings, rewrite)

CAP = 100_000


class TooLarge(Exception):
    """An enumeration went past the cap."""


def capped(items: Iterable, cap: int = CAP) -> Iterator:
    for k, x in enumerate(items):
        if k >= cap:
            raise TooLarge(f"more than {cap} candidates")
        yield x


# --- generation ------------------------------------------------------------

@dataclass(frozen=True)
class GenConfig:
    seed: int = 0
    max_predicates: int = 3
    max_arity: int = 2
    max_rules: int = 2
    max_rule_disjuncts: int = 2
    max_atoms_per_set: int = 3
    max_constants: int = 2
    max_cqs: int = 2
    p_existential: float = 0.3
    p_constant: float = 0.15

    def __post_init__(self):
        bounds = dict(max_predicates=None, max_arity=3, max_rules=None, max_rule_disjuncts=3,
                      max_atoms_per_set=5, max_constants=4, max_cqs=None)
        for name, hi in bounds.items():
            v = getattr(self, name)
            if v <= 0 or (hi is not None and v > hi):
                raise ValueError(f"{name}={v} out of range")
        for name in ("p_existential", "p_constant"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must be a probability")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    def reseeded(self, seed: int) -> "GenConfig":
        return GenConfig(seed % 2 ** 64, self.max_predicates, self.max_arity, self.max_rules,
                         self.max_rule_disjuncts, self.max_atoms_per_set, self.max_constants,
                         self.max_cqs, self.p_existential, self.p_constant)


class _Gen:
    def __init__(self, cfg: GenConfig):
        self.cfg = cfg
        self.rng = random.Random(cfg.seed)
        n = self.rng.randint(1, cfg.max_predicates)
        self.preds = [Predicate(f"p{i}", self.rng.randint(1, cfg.max_arity)) for i in range(n)]
        self.consts = [Constant(c) for c in "abcd"[:cfg.max_constants]]

    def size(self) -> int:
        return self.rng.randint(1, self.cfg.max_atoms_per_set)

    def facts(self) -> AtomSet:
        return frozenset(Atom(p, tuple(self.rng.choice(self.consts) for _ in range(p.arity)))
                         for p in (self.rng.choice(self.preds) for _ in range(self.size())))

    def atoms(self, pool: List[Variable], k: int, extra=None) -> List[Atom]:
        out = []
        for _ in range(k):
            p = self.rng.choice(self.preds)
            args = []
            for _ in range(p.arity):
                if self.rng.random() < self.cfg.p_constant:
                    args.append(self.rng.choice(self.consts))
                elif extra is not None and self.rng.random() < self.cfg.p_existential:
                    args.append(extra())
                else:
                    args.append(self.rng.choice(pool))
            out.append(Atom(p, tuple(args)))
        return out

    def rule(self, name: str) -> DisjunctiveRule:
        pool = [fresh_variable(n) for n in ("X", "Y", "Z")[:self.rng.randint(1, 3)]]
        body = self.atoms(pool, self.size())
        used = sorted({t for a in body for t in a.args if isinstance(t, Variable)}, key=lambda v: v.id)
        if not used:
            used = [pool[0]]
            body.append(self._var_atom(pool[0]))
        head = []
        for _ in range(self.rng.randint(1, self.cfg.max_rule_disjuncts)):
            zs: List[Variable] = []

            def ex():
                if zs and self.rng.random() < 0.5:
                    return self.rng.choice(zs)
                zs.append(fresh_variable(f"E{len(zs) + 1}"))
                return zs[-1]
            head.append(self.atoms(used, self.rng.randint(1, 2), ex))
        return DisjunctiveRule(tuple(body), tuple(tuple(h) for h in head), name)

    def _var_atom(self, v: Variable) -> Atom:
        p = self.rng.choice(self.preds)
        return Atom(p, (v,) * p.arity)

    def cq(self) -> CQ:
        pool = [fresh_variable(n) for n in ("U", "V", "W")[:self.rng.randint(1, 3)]]
        return frozenset(self.atoms(pool, self.size()))


def gen_instance(cfg: GenConfig) -> Tuple[AtomSet, RuleSet, UCQ]:
    """A small (facts, rules, UCQ) triple; the same seed gives the same instance."""
    g = _Gen(cfg)
    facts = g.facts()
    rules = RuleSet(g.rule(f"r{i + 1}") for i in range(g.rng.randint(1, cfg.max_rules)))
    if g.rng.random() < 0.7:
        # make some rule applicable
        r = g.rng.choice(rules)
        ground = {v: g.rng.choice(g.consts) for v in sorted(r.body_vars, key=lambda v: v.id)}
        facts = facts | Substitution(ground).atoms(r.body)
    ucq = frozenset(g.cq() for _ in range(g.rng.randint(1, cfg.max_cqs)))
    return facts, rules, ucq


def generalize(atoms: Iterable[Atom], rng: random.Random, p_keep_constant: float = 0.3) -> CQ:
    """Replace terms by fresh variables (one per term); some constants survive."""
    ren: Dict = {}
    out = set()
    for a in sorted(atoms, key=repr):
        args = []
        for t in a.args:
            if t not in ren:
                keep = isinstance(t, Constant) and rng.random() < p_keep_constant
                ren[t] = t if keep else fresh_variable()
            args.append(ren[t])
        out.add(Atom(a.predicate, tuple(args)))
    return frozenset(out)


def sample_subset(atoms: Iterable[Atom], rng: random.Random, must: Iterable[Atom] = ()) -> frozenset:
    atoms = sorted(atoms, key=repr)
    must = sorted(must, key=repr)
    picked = {a for a in atoms if rng.random() < 0.5}
    if must:
        picked.add(rng.choice(must))
    if not picked:
        picked.add(rng.choice(atoms))
    return frozenset(picked)


# --- the correspondence checks ---------------------------------------------

def _alpha(f: AtomSet, t: Trigger) -> List[AtomSet]:
    return apply_trigger(f, t)


def _unifiers(q: Iterable[CQ], r: DisjunctiveRule) -> Iterator[DisjunctivePieceUnifier]:
    return capped(enumerate_disjunctive_piece_unifiers(list(q), r))


def check_backward_forward(f: AtomSet, q: Iterable[CQ], r: DisjunctiveRule,
                           mu: Optional[DisjunctivePieceUnifier] = None) -> bool:
    """Some trigger (r, h) on f has α∨(f, r, h) ⊨ q.

    Meant for f ⊨ β∨(q, r, mu); ``mu`` is only used to check that.
    """
    f = frozenset(f)
    q = [frozenset(c) for c in q]
    if mu is not None and not maps_to(apply_beta(mu), f):
        raise ValueError("precondition: f must entail the β∨ image")
    return any(ucq_entails(_alpha(f, t), q) for t in capped(find_triggers(f, r)))


def check_forward_backward(f: AtomSet, q: Iterable[CQ], t: Trigger) -> bool:
    """f ⊨ q, or some μ∨ of q with the trigger's rule has f ⊨ β∨(q, r, μ∨).

    Meant for α∨(f, r, h) ⊨ q.
    """
    f = frozenset(f)
    q = [frozenset(c) for c in q]
    if not ucq_entails(_alpha(f, t), q):
        raise ValueError("precondition: the α∨ output must entail q")
    if entails_some(f, q):
        return True
    return any(maps_to(apply_beta(mu), f) for mu in _unifiers(q, t.rule))


def check_alpha_preservation(f1: AtomSet, f2: AtomSet, r: DisjunctiveRule, t2: Trigger) -> bool:
    """f1 ⊨ f2: some trigger on f1 gives α∨(f1, r, h1) ⊨ α∨(f2, r, h2)."""
    f1, f2 = frozenset(f1), frozenset(f2)
    if not maps_to(f2, f1):
        raise ValueError("precondition: f1 must entail f2")
    out2 = _alpha(f2, t2)
    return any(ucq_entails(_alpha(f1, t1), out2) for t1 in capped(find_triggers(f1, r)))


def check_beta_preservation(q1: Iterable[CQ], q2: Iterable[CQ], r: DisjunctiveRule,
                            mu2: DisjunctivePieceUnifier) -> bool:
    """q2 ⊨ q1: β∨(q2, μ2) ⊨ q1, or β∨(q2, μ2) ⊨ β∨(q1, μ1) for some μ1 of q1."""
    q1 = [frozenset(c) for c in q1]
    q2 = [frozenset(c) for c in q2]
    if not ucq_entails(q2, q1):
        raise ValueError("precondition: q2 must entail q1")
    b2 = apply_beta(mu2)
    if entails_some(b2, q1):
        return True
    return any(maps_to(apply_beta(mu1), b2) for mu1 in _unifiers(q1, r))


def check_alpha_then_beta(f: AtomSet, t: Trigger) -> bool:
    """Some μ∨ of q = α∨(f, r, h) with r has f ⊨ β∨(q, r, μ∨)."""
    f = frozenset(f)
    q = _alpha(f, t)
    return any(maps_to(apply_beta(mu), f) for mu in _unifiers(q, t.rule))


def check_beta_then_alpha(q: Iterable[CQ], mu: DisjunctivePieceUnifier) -> bool:
    """Some trigger on f = β∨(q, r, μ∨) has α∨(f, r, h) ⊨ q."""
    q = [frozenset(c) for c in q]
    f, _ = safe_copy(apply_beta(mu))
    return any(ucq_entails(_alpha(f, t), q) for t in capped(find_triggers(f, mu.rule)))


# --- chase against rewriting -------------------------------------------------

@dataclass
class Violation:
    kind: str                 # soundness | completeness
    depth: int
    cq: Optional[CQ]
    detail: str

    def to_dict(self):
        from .textio import format_cq
        return {"kind": self.kind, "depth": self.depth,
                "cq": format_cq(self.cq) if self.cq is not None else None, "detail": self.detail}


@dataclass
class CrossReport:
    depth: int
    sound_checked: int = 0
    complete_checked: int = 0
    violations: List[Violation] = field(default_factory=list)
    chase_status: Optional[str] = None

    @property
    def ok(self) -> bool:
        return not self.violations


def cross_check(f: Iterable[Atom], rules: Iterable[DisjunctiveRule], q: Iterable[CQ], depth: int = 3,
                budget: Optional[Budget] = None, search_limit: int = CAP) -> CrossReport:
    """Compare depth-bounded rewriting with depth-bounded derivations on f.

    For each k ≤ depth, with Q*_k the rewriting after k iterations:
    soundness, some CQ of Q*_k maps to f only if some derivation tree of
    depth ≤ k has all leaves entailing q; completeness, the converse.
    Both directions hold exactly by the α∨/β∨ correspondence.  The
    unbounded chase verdict is recorded too (``Entailed`` whenever some
    rewriting CQ maps to f, unless it ran out of budget).
    """
    f = frozenset(f)
    rules = RuleSet(rules)
    q = [canonical_cq(c) for c in q]
    budget = budget or Budget(max_iterations=depth, max_cq_atoms=64)
    out = rewrite(q, rules, budget, keep_history=True)
    if out.truncated:
        raise TooLarge("rewriting dropped oversized CQs")
    report = CrossReport(depth)
    limit = [search_limit]
    for k in range(depth + 1):
        snapshot = out.history[min(k, len(out.history) - 1)]
        witness = next((c for c in snapshot if maps_to(c, f)), None)
        try:
            derivable = entailed_within(f, rules, q, k, limit)
        except RuntimeError as e:
            raise TooLarge(str(e))
        if witness is not None:
            report.sound_checked += 1
            if not derivable:
                report.violations.append(Violation(
                    "soundness", k, witness, "rewriting CQ maps to f but no derivation of this depth entails q"))
        if derivable:
            report.complete_checked += 1
            if witness is None:
                report.violations.append(Violation(
                    "completeness", k, None, "a derivation entails q but no rewriting CQ maps to f"))
    if any(maps_to(c, f) for h in out.history for c in h):
        verdict = chase_entails(f, rules, q)
        report.chase_status = verdict.status
        if verdict.status == "not_entailed":
            report.violations.append(Violation("soundness", depth, None, "chase saturated without entailment"))
    return report


def w_iterates_capped(q: Iterable[CQ], rules: Iterable[DisjunctiveRule], n: int, cap: int = CAP) -> List[UCQ]:
    """[W_0, ..., W_n], raising TooLarge after ``cap`` generated CQs in total."""
    out = [frozenset(canonical_cq(c) for c in q)]
    count = 0
    for _ in range(n):
        new = set()
        for c in one_step_rewritings(out[-1], rules):
            count += 1
            if count > cap:
                raise TooLarge(f"more than {cap} CQs generated")
            new.add(c)
        out.append(out[-1] | new)
    return out


def check_algorithm_invariant(q: Iterable[CQ], rules: Iterable[DisjunctiveRule], n: int = 3,
                              cap: int = CAP) -> List[bool]:
    """Q* after each of the first n iterations is equivalent to W_i."""
    rules = RuleSet(rules)
    q = [canonical_cq(c) for c in q]
    ws = w_iterates_capped(q, rules, n, cap)
    out = rewrite(q, rules, Budget(max_iterations=n, max_cq_atoms=10 ** 6), keep_history=True)
    res = []
    for i in range(1, n + 1):
        snap = out.history[min(i, len(out.history) - 1)]
        res.append(ucq_equivalent(snap, ws[i]))
    return res


# --- suites -------------------------------------------------------------

CHECKS = ("backward_forward", "forward_backward", "alpha_preservation", "beta_preservation",
          "alpha_then_beta", "beta_then_alpha", "cross_check")


@dataclass
class SuiteReport:
    seed: int
    count: int
    depth: int
    checked: Dict[str, int] = field(default_factory=lambda: {c: 0 for c in CHECKS})
    failures: List[Dict] = field(default_factory=list)
    regenerated: int = 0
    elapsed: float = 0.0

    @property
    def ok(self) -> bool:
        return not self.failures

    def to_json(self) -> str:
        return json.dumps({"seed": self.seed, "count": self.count, "depth": self.depth,
                           "checked": self.checked, "failures": self.failures,
                           "regenerated": self.regenerated, "ok": self.ok}, indent=2, sort_keys=True)


def _instance_checks(cfg: GenConfig, depth: int, report: SuiteReport) -> None:
    """Run every check on one instance; raises TooLarge to ask for another."""
    f, rules, ucq = gen_instance(cfg)
    rng = random.Random(cfg.seed ^ 0x5EED)
    counts: Dict[str, int] = {c: 0 for c in CHECKS}
    fails: List[Dict] = []

    def record(name, ok, **data):
        counts[name] += 1
        if not ok:
            fails.append({"check": name, "seed": cfg.seed, **data})

    triggers = [(r, t) for r in rules for t in capped(find_triggers(f, r))]
    # UCQs mined from α∨ outputs, so that unifiers exist
    mined = []
    for r, t in triggers:
        outs = _alpha(f, t)
        mined.append((t, [generalize(sample_subset(o, rng, o - f), rng) for o in outs]))

    for t, q in mined:
        record("forward_backward", check_forward_backward(f, q, t), rule=t.rule.name)
        record("alpha_then_beta", check_alpha_then_beta(f, t), rule=t.rule.name)

    f2 = generalize(sample_subset(f, rng), rng)
    for r in rules:
        for t2 in capped(find_triggers(f2, r)):
            record("alpha_preservation", check_alpha_preservation(f, f2, r, t2), rule=r.name)

    queries = [list(ucq)] + [q for _, q in mined[:2]]
    for q in queries:
        q1 = [generalize(sample_subset(c, rng), rng) for c in q]
        for r in rules:
            for mu in _unifiers(q, r):
                beta = apply_beta(mu)
                fb = freeze(beta) | f
                record("backward_forward", check_backward_forward(fb, q, r, mu), rule=r.name)
                record("beta_then_alpha", check_beta_then_alpha(q, mu), rule=r.name)
                record("beta_preservation", check_beta_preservation(q1, q, r, mu), rule=r.name)

    cr = cross_check(f, rules, ucq, depth)
    counts["cross_check"] += 1
    for v in cr.violations:
        fails.append({"check": "cross_check", "seed": cfg.seed, **v.to_dict()})
    for k, v in counts.items():
        report.checked[k] += v
    report.failures.extend(fails)


def run_suite(count: int = 200, seed: int = 0, depth: int = 3, cfg: Optional[GenConfig] = None,
              max_attempts: int = 20) -> SuiteReport:
    """All checks on ``count`` seeded instances."""
    cfg = cfg or GenConfig()
    report = SuiteReport(seed, count, depth)
    start = time.monotonic()
    for i in range(count):
        for attempt in range(max_attempts):
            c = cfg.reseeded(seed * 1_000_003 + i * 101 + attempt)
            try:
                _instance_checks(c, depth, report)
                break
            except TooLarge:
                report.regenerated += 1
        else:
            report.failures.append({"check": "generation", "seed": seed, "instance": i,
                                    "detail": "no instance within the cap"})
    report.elapsed = time.monotonic() - start
    return report


def run_invariant_suite(count: int = 20, seed: int = 0, n: int = 3, cfg: Optional[GenConfig] = None,
                        cap: int = 5000, max_attempts: int = 50) -> List[Tuple[int, List[bool]]]:
    """(seed, per-iteration verdicts) for ``count`` instances with at least one rewriting step.

    Instances whose W_n needs more than ``cap`` β∨ applications, or whose
    UCQ has no piece-unifier at all, are replaced by the next seed.
    """
    cfg = cfg or GenConfig(max_atoms_per_set=2)
    out = []
    k = 0
    while len(out) < count:
        for _ in range(max_attempts):
            c = cfg.reseeded(seed * 1_000_003 + k)
            k += 1
            _, rules, ucq = gen_instance(c)
            if not any(True for _ in one_step_rewritings(ucq, rules)):
                continue
            try:
                out.append((c.seed, check_algorithm_invariant(ucq, rules, n, cap)))
                break
            except TooLarge:
                continue
        else:
            raise RuntimeError("could not find an instance within the cap")
    return out

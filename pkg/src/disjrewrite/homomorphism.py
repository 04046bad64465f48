"""Homomorphism search, entailment between (U)CQs, covers."""
from __future__ import annotations

from collections import defaultdict
from functools import lru_cache
from typing import Dict, Iterable, Iterator, List, Optional, Tuple

from .model import (CQ, UCQ, Atom, Constant, Substitution, Variable,
                    sorted_atoms, sorted_cqs)


# Terms are interned to small ints so the search works on tuples of ints.
_term_ids: Dict[object, int] = {}
_terms_by_id: List[object] = []


def _intern(t) -> int:
    i = _term_ids.get(t)
    if i is None:
        i = _term_ids[t] = len(_terms_by_id)
        _terms_by_id.append(t)
    return i


class _Source:
    """Source atoms with variables numbered 0..n-1 (encoded as -(k+1))."""

    __slots__ = ("variables", "atoms", "preds", "order", "plan", "labels", "const_labels")

    def __init__(self, atoms):
        index: Dict[Variable, int] = {}
        enc = []
        for a in sorted_atoms(atoms):
            args = []
            for t in a.args:
                if isinstance(t, Variable):
                    k = index.get(t)
                    if k is None:
                        k = index[t] = len(index)
                    args.append(-(k + 1))
                else:
                    args.append(_intern(t))
            enc.append((a.predicate, tuple(args)))
        self.variables = list(index)
        self.atoms = enc
        self.preds = frozenset(p for p, _ in enc)
        self.order = self._connected_order()
        self.plan = None
        self.labels = list(set(_occurrences(enc, lambda x: x < 0).values()))
        self.const_labels = _occurrences(enc, lambda x: x >= 0)

    def _connected_order(self) -> List[int]:
        """Most ground atom first, then atoms sharing most variables with those placed."""
        remaining = set(range(len(self.atoms)))
        order: List[int] = []
        placed: set = set()
        while remaining:
            def key(i):
                vs = {s for s in self.atoms[i][1] if s < 0}
                return (-len(vs & placed), len(vs - placed), i)
            best = min(remaining, key=key)
            remaining.discard(best)
            order.append(best)
            placed.update(s for s in self.atoms[best][1] if s < 0)
        return order


class _Target:
    __slots__ = ("by_pred", "index", "labels", "term_labels")

    def __init__(self, atoms):
        by_pred: Dict = defaultdict(list)
        index: Dict = defaultdict(list)
        for a in sorted_atoms(atoms):
            args = tuple(_intern(t) for t in a.args)
            by_pred[a.predicate].append(args)
            for pos, x in enumerate(args):
                index[(a.predicate, pos, x)].append(args)
        self.by_pred = dict(by_pred)
        self.index = dict(index)
        self.term_labels = _occurrences([(p, args) for p, lst in self.by_pred.items() for args in lst],
                                        lambda x: True)
        self.labels = list(set(self.term_labels.values()))


def _occurrences(enc, pick) -> Dict[int, frozenset]:
    """(predicate, position) pairs at which each selected term occurs."""
    occ: Dict[int, set] = defaultdict(set)
    for pred, args in enc:
        for pos, x in enumerate(args):
            if pick(x):
                occ[x].add((pred, pos))
    return {x: frozenset(o) for x, o in occ.items()}


def _labels_fit(src: "_Source", tgt: "_Target") -> bool:
    """Each source term needs a target term occurring in at least the same places."""
    if not src.preds <= tgt.by_pred.keys():
        return False
    for c, sl in src.const_labels.items():
        tl = tgt.term_labels.get(c)
        if tl is None or not sl <= tl:
            return False
    return all(any(sl <= tl for tl in tgt.labels) for sl in src.labels)


@lru_cache(maxsize=1 << 16)
def _compiled_source(atoms: frozenset) -> _Source:
    return _Source(atoms)


@lru_cache(maxsize=1 << 16)
def _compiled_target(atoms: frozenset) -> _Target:
    return _Target(atoms)


def _match(args, tgt, binding):
    """New bindings (list of var indices) if args can map onto tgt, else None."""
    new = []
    for s, t in zip(args, tgt):
        if s < 0:
            k = -s - 1
            b = binding[k]
            if b < 0:
                binding[k] = t
                new.append(k)
            elif b != t:
                for j in new:
                    binding[j] = -1
                return None
        elif s != t:
            for j in new:
                binding[j] = -1
            return None
    return new


def _plan(src: _Source, placed: set):
    """Matching steps in source order; each carries an index probe if one is available."""
    placed = set(placed)
    plan = []
    for i in src.order:
        pred, args = src.atoms[i]
        probe = None
        for pos, x in enumerate(args):
            if x >= 0:
                probe = (pred, pos, x, False)
                break
            if -x - 1 in placed:
                probe = (pred, pos, -x - 1, True)
                break
        plan.append((pred, args, probe))
        placed.update(-x - 1 for x in args if x < 0)
    return plan


def _search(src: _Source, tgt: _Target, binding: List[int]) -> Iterator[List[int]]:
    """Yield complete bindings; ``binding`` is reused between solutions."""
    prebound = {k for k, b in enumerate(binding) if b >= 0}
    if prebound:
        plan = _plan(src, prebound)
    else:
        plan = src.plan
        if plan is None:
            plan = src.plan = _plan(src, ())
    by_pred, index = tgt.by_pred, tgt.index
    n = len(plan)

    def rec(k):
        if k == n:
            yield binding
            return
        pred, args, probe = plan[k]
        if probe is None:
            cands = by_pred.get(pred, ())
        elif probe[3]:
            cands = index.get((pred, probe[1], binding[probe[2]]), ())
        else:
            cands = index.get((pred, probe[1], probe[2]), ())
        for t in cands:
            new = _match(args, t, binding)
            if new is None:
                continue
            yield from rec(k + 1)
            for j in new:
                binding[j] = -1

    yield from rec(0)


def homomorphisms(source: Iterable[Atom], target: Iterable[Atom],
                  partial: Optional[Dict[Variable, object]] = None) -> Iterator[Substitution]:
    """Enumerate all substitutions h of vars(source) with h(source) ⊆ target.

    ``partial`` pre-binds some source variables.  Source atoms are matched
    most-constrained first; candidate lists are filtered against the
    current binding before descending.
    """
    src = _compiled_source(frozenset(source))
    tgt = _compiled_target(frozenset(target))
    binding = [-1] * len(src.variables)
    base = Substitution()
    for v, t in (partial or {}).items():
        try:
            binding[src.variables.index(v)] = _intern(t)
        except ValueError:
            base[v] = t
    for b in _search(src, tgt, binding):
        h = Substitution(base)
        for v, i in zip(src.variables, b):
            h[v] = _terms_by_id[i]
        yield h


def homomorphism(source: Iterable[Atom], target: Iterable[Atom],
                 partial: Optional[Dict[Variable, object]] = None) -> Optional[Substitution]:
    """First homomorphism from source to target, or None."""
    for h in homomorphisms(source, target, partial):
        return h
    return None


_bits: Dict[Tuple, int] = {}


def _bit(key) -> int:
    b = _bits.get(key)
    if b is None:
        b = _bits[key] = 1 << len(_bits)
    return b


class _Sig:
    """Bitmask summary of a CQ: a cheap necessary test for homomorphisms.

    ``preds`` has one bit per predicate; each term gets the mask of the
    (predicate, position) places it occurs in.  If h maps s into t then
    every variable mask of s is included in the mask of its image.
    """

    __slots__ = ("preds", "var_masks", "max_masks")

    def __init__(self, atoms):
        self.preds = 0
        occ: Dict[object, int] = defaultdict(int)
        for a in atoms:
            self.preds |= _bit(a.predicate)
            for pos, t in enumerate(a.args):
                occ[t] |= _bit((a.predicate, pos))
        self.var_masks = tuple(set(m for t, m in occ.items() if isinstance(t, Variable)))
        masks = set(occ.values())
        self.max_masks = tuple(m for m in masks if not any(m != o and m & o == m for o in masks))


@lru_cache(maxsize=1 << 16)
def _sig(atoms: frozenset) -> _Sig:
    return _Sig(atoms)


def _may_map(s: _Sig, t: _Sig) -> bool:
    if s.preds & ~t.preds:
        return False
    tm = t.max_masks
    for m in s.var_masks:
        for o in tm:
            if not m & ~o:
                break
        else:
            return False
    return True


@lru_cache(maxsize=1 << 18)
def _maps_to(source: CQ, target: CQ) -> bool:
    src = _compiled_source(source)
    tgt = _compiled_target(target)
    if not _labels_fit(src, tgt):
        return False
    for _ in _search(src, tgt, [-1] * len(src.variables)):
        return True
    return False


def maps_to(source: Iterable[Atom], target: Iterable[Atom]) -> bool:
    return _maps_to(frozenset(source), frozenset(target))


def cq_entails(q1: Iterable[Atom], q2: Iterable[Atom]) -> bool:
    """q1 ⊨ q2, i.e. q2 maps to q1 (q1 is more specific)."""
    return maps_to(q2, q1)


def cq_equivalent(q1, q2) -> bool:
    return cq_entails(q1, q2) and cq_entails(q2, q1)


def ucq_entails(q1: Iterable[CQ], q2: Iterable[CQ]) -> bool:
    """Every CQ of q1 entails some CQ of q2."""
    q2 = list(q2)
    return all(any(cq_entails(a, b) for b in q2) for a in q1)


def ucq_equivalent(q1, q2) -> bool:
    q1, q2 = list(q1), list(q2)
    return ucq_entails(q1, q2) and ucq_entails(q2, q1)


def entails_some(facts: Iterable[Atom], ucq: Iterable[CQ]) -> bool:
    """The fact base satisfies at least one CQ of the UCQ."""
    facts = frozenset(facts)
    return any(maps_to(q, facts) for q in ucq)


def cover(q: Iterable[CQ]) -> UCQ:
    """Minimal equivalent subset; ties between equivalent CQs keep the canonically smaller."""
    # kept CQs grouped by predicate mask; a homomorphism needs preds(src) ⊆ preds(tgt)
    groups: Dict[int, Dict[CQ, _Sig]] = {}
    for a in sorted_cqs(set(q)):
        sa = _sig(a)
        pa = sa.preds
        if any(_may_map(sb, sa) and _maps_to(b, a)
               for pm, group in groups.items() if not pm & ~pa
               for b, sb in group.items()):
            continue
        # a is not more specific than anything kept; drop what it generalizes
        for pm, group in groups.items():
            if pa & ~pm:
                continue
            for b in [b for b, sb in group.items() if _may_map(sa, sb) and _maps_to(a, b)]:
                del group[b]
        groups.setdefault(pa, {})[a] = sa
    return frozenset(b for group in groups.values() for b in group)


def remove_more_specific(a: Iterable[CQ], b: Iterable[CQ]) -> UCQ:
    """CQs of a that are not more specific than any CQ of b."""
    general = [(g, _sig(g)) for g in b]
    out = []
    for q in a:
        q = frozenset(q)
        sq = _sig(q)
        if not any(_may_map(sg, sq) and _maps_to(g, q) for g, sg in general):
            out.append(q)
    return frozenset(out)


def isomorphism(source: Iterable[Atom], target: Iterable[Atom]) -> Optional[Substitution]:
    """A variable bijection mapping source exactly onto target, or None."""
    source, target = frozenset(source), frozenset(target)
    if len(source) != len(target):
        return None
    for h in homomorphisms(source, target):
        images = list(h.values())
        if all(isinstance(t, Variable) for t in images) and len(set(images)) == len(images) \
                and h.atoms(source) == target:
            return h
    return None


def isomorphic(a, b) -> bool:
    return isomorphism(a, b) is not None


def freeze(atoms: Iterable[Atom], tag: str = "_v") -> frozenset:
    """Replace every variable by a constant named after its id."""
    sub = Substitution()
    atoms = list(atoms)
    for a in atoms:
        for t in a.args:
            if isinstance(t, Variable) and t not in sub:
                sub[t] = Constant(f"{tag}{t.id}")
    return sub.atoms(atoms)

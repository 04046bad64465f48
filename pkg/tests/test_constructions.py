import itertools

import pytest

from disjrewrite import constructions as cons
from disjrewrite import textio
from disjrewrite.homomorphism import isomorphic
from disjrewrite.model import Constant, Predicate, atom, fresh_variable, preds_of, rule

from conftest import FIXTURES
from oracles import equivalent, incomparable

NONFUS = textio.parse((FIXTURES / "nonfus.dlp").read_text()).rules


def V(n):
    return fresh_variable(n)


# --- non-rewritable family -------------------------------------------------

def test_nonfus_query_shape_for_binary_rule():
    q = cons.build_nonfus_query(NONFUS.by_name("r"))
    v1, v2 = V("v1"), V("v2")
    link = Predicate("link_r", 2)
    expected = {atom("t1", v1), atom("link_r", v1, v2), atom("t2", v2)}
    assert link in preds_of(q)
    assert isomorphic(q, expected)


def test_grandparent_link_takes_both_frontiers():
    q = cons.build_nonfus_query(NONFUS.by_name("isGrandParent"))
    link, = [a for a in q if a.predicate.name == "link_isGrandParent"]
    assert link.predicate.arity == 4
    assert len(q) == 5


def test_family_grows_by_one_body_copy_per_step():
    fam = cons.build_nonfus_family(NONFUS.by_name("r"), 3)
    assert [sum(a.predicate.name == "p0" for a in q) for q in fam] == [0, 1, 2, 3]
    for x, y in itertools.combinations(fam, 2):
        assert incomparable(x, y)


def test_family_rejects_negative_k():
    with pytest.raises(ValueError):
        cons.build_nonfus_family(NONFUS.by_name("r"), -1)


def test_nonfus_preconditions():
    x, y, z = V("x"), V("y"), V("z")
    with pytest.raises(cons.InvalidInput):
        cons.build_nonfus_query(rule([atom("p", x)], [atom("q", x)], name="conj"))
    with pytest.raises(cons.Disconnected):
        cons.build_nonfus_query(rule([atom("p", x)], [atom("q", x)], [atom("s", z)], name="loose"))
    with pytest.raises(cons.ConjunctiveEquivalent):
        cons.build_nonfus_query(rule([atom("p", x, y)], [atom("q", x, z)], [atom("q", x, y)], name="eq"))


# --- reduction -------------------------------------------------------------

def base_instance():
    d = textio.parse((FIXTURES / "reduction.dlp").read_text())
    return cons.build_reduction(d.query("q"), d.rules)


def test_reduction_artifacts():
    red = base_instance()
    X, Y = V("X"), V("Y")
    assert isomorphic(red.query_q, {atom("hat_T", X), atom("hat_q", X)})
    entry, = red.reduced
    assert entry.special == Predicate("pr_r1", 1)
    assert isomorphic(entry.query, {atom("hat_p", X, Y), atom("hat_q", X), atom("hat_T", X),
                                    atom("hat_T", Y), atom("pr_r1", Y)})
    m = entry.mapping_rule
    assert m.name == "m_r1" and [a.predicate.name for a in m.body] == ["tt_T"]
    assert [[a.predicate.name for a in h] for h in m.head] == [["pr_r1"], ["hat_q"]]
    assert sorted(r.name for r in red.trans) == ["trans_p", "trans_q", "trans_tt_T"]
    assert {p.name for p in red.source} == {"p", "q", "tt_T"}


def test_reverse_round_trip():
    red = base_instance()
    assert equivalent(cons.reverse(red.query_q, red), red.query)
    back = cons.reverse(red.reduced[0].query, red)
    assert cons.rules_equivalent(back, red.rules[0])


def test_reverse_errors():
    red = base_instance()
    u, w = V("u"), V("w")
    with pytest.raises(cons.TooManySpecialAtoms):
        cons.reverse({atom("pr_r1", u), atom("pr_r1", w)}, red)
    with pytest.raises(cons.UnknownSpecialPredicate):
        cons.reverse({atom("pr_other", u)}, red)


def test_reduction_input_checks():
    x, y, z = V("x"), V("y"), V("z")
    q = {atom("q", x)}
    with pytest.raises(cons.InvalidInput):
        cons.build_reduction(q, [rule([atom("p", x, y)], [atom("q", z)])])
    with pytest.raises(cons.InvalidInput):
        cons.build_reduction(q, [rule([atom("p", x, y)], [atom("q", x)], [atom("q", y)])])
    with pytest.raises(cons.InvalidInput):
        cons.build_reduction(q, [rule([atom("p", x, Constant("a"))], [atom("q", x)])])
    with pytest.raises(cons.InvalidInput):
        cons.build_reduction({atom("hat_q", x)}, [])


def test_unnamed_rules_get_names():
    x, y = V("x"), V("y")
    red = cons.build_reduction({atom("q", x)}, [rule([atom("p", x, y)], [atom("q", x)])])
    assert red.reduced[0].mapping_rule.name == "m_r1"


def test_reduction_spot_check():
    ok, missing = cons.reduction_spot_check(base_instance())
    assert ok and missing == []


def test_rules_equivalent_distinguishes_head_from_body():
    x, y = V("x"), V("y")
    r1 = rule([atom("p", x, y)], [atom("p", y, x)])
    r2 = rule([atom("p", y, x)], [atom("p", x, y)])
    r3 = rule([atom("p", x, x)], [atom("p", x, x)])
    assert cons.rules_equivalent(r1, r2)
    assert not cons.rules_equivalent(r1, r3)


# --- unfolding -------------------------------------------------------------

def trans():
    return textio.parse((FIXTURES / "unfold.dlp").read_text()).rules


def test_unfold_resolves_each_body_atom():
    t, = trans()
    out = cons.unfold(t, t)
    assert len(out) == 2
    assert all(len(r.body) == 3 for r in out)
    assert cons.rules_equivalent(out[0], out[1])


def test_unfold_closure_chains_are_entailed():
    closure = cons.unfold_closure(trans(), 3)
    assert sorted(len(r.body) for r in closure) == [2, 3, 4, 5]
    for r in closure:
        assert cons.rule_entailed(trans(), r)


def test_rule_entailment_is_not_trivial():
    x, y = V("x"), V("y")
    assert not cons.rule_entailed(trans(), rule([atom("p", x, y)], [atom("p", y, x)]))


def test_unfold_closure_rejects_bad_input():
    x, y = V("x"), V("y")
    with pytest.raises(ValueError):
        cons.unfold_closure(trans(), -1)
    with pytest.raises(cons.InvalidInput):
        cons.unfold_closure([rule([atom("p", x)], [atom("q", x, y)])], 1)

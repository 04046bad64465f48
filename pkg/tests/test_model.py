import pytest

from disjrewrite.model import (Constant, Mapping, Predicate, RuleSet, Substitution, Variable, atom,
                               canonical_cq, canonical_string, fresh_variable, ordered_vars, rule,
                               safe_copy, vars_of)

X, Y, Z, W = (fresh_variable(n) for n in "XYZW")
a, b = Constant("a"), Constant("b")


def test_terms_compare_by_identity():
    assert Variable(5, "x") == Variable(5, "y")
    assert Variable(5) != Variable(6)
    assert Constant("a") == a and Constant("a") != Constant("b")
    assert Variable(1) != Constant("1")


def test_atom_builder_sets_arity():
    at = atom("p", X, a)
    assert at.predicate == Predicate("p", 2)
    assert repr(at) == "p(X,a)"


def test_substitution_leaves_constants_alone():
    s = Substitution({X: a, Y: Z})
    assert s(atom("p", X, Y, b)) == atom("p", a, Z, b)
    assert s(W) is W


def test_solved_resolves_chains():
    s = Substitution.solved({X: Y, Y: Z})
    assert s[X] == Z and s[Y] == Z


def test_safe_copy_is_disjoint_and_isomorphic():
    q = {atom("p", X, Y), atom("q", Y, a)}
    copy, ren = safe_copy(q)
    assert not vars_of(copy) & vars_of(q)
    assert ren.atoms(q) == copy


def test_canonical_form_ignores_renaming():
    q1 = {atom("p", X, Y), atom("p", Y, Z), atom("s", Z)}
    copy, _ = safe_copy(q1)
    assert canonical_cq(q1) == canonical_cq(copy)
    assert canonical_string(q1) == canonical_string(copy)
    assert canonical_cq(q1) != canonical_cq({atom("p", X, Y), atom("p", Y, Z), atom("s", X)})


def test_ordered_vars_first_occurrence():
    assert ordered_vars([atom("p", Y, X), atom("q", Z, Y)]) == [Y, X, Z]


def test_rule_frontier_and_existentials():
    z1, z2 = fresh_variable("z1"), fresh_variable("z2")
    r = rule([atom("p", X, Y)], [atom("r", X, z1)], [atom("r", Y, z2), atom("s", z2)], name="r")
    assert r.frontier == (X, Y)
    assert r.disjunct_frontier(1) == (Y,)
    assert r.existentials(0) == {z1} and r.all_existentials == {z1, z2}
    assert not r.is_conjunctive and not r.is_datalog


def test_rule_needs_body_and_head():
    with pytest.raises(ValueError):
        rule([], [atom("p", X)])
    with pytest.raises(ValueError):
        rule([atom("p", X)], [])


def test_rule_set_renames_apart():
    r = rule([atom("p", X)], [atom("q", X)])
    rs = RuleSet([r, r])
    assert not rs[0].variables & rs[1].variables


def test_mapping_checks_sides():
    p, q = Predicate("p", 1), Predicate("q", 1)
    good = rule([atom("p", X)], [atom("q", X)])
    Mapping([good], {p}, {q})
    with pytest.raises(ValueError):
        Mapping([good], {p, q}, {q})
    with pytest.raises(ValueError):
        Mapping([rule([atom("q", X)], [atom("p", X)])], {p}, {q})

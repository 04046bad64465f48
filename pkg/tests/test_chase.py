import pytest

from disjrewrite import chase, harness, textio
from disjrewrite.homomorphism import entails_some
from disjrewrite.model import Constant, atom, fresh_variable, rule

from conftest import FIXTURES

a, b = Constant("a"), Constant("b")


def coloring():
    x = fresh_variable("X")
    return rule([atom("v", x)], [atom("g", x)], [atom("r", x)], name="color")


def test_triggers_sorted_and_deduplicated():
    f = {atom("v", b), atom("v", a)}
    ts = chase.find_triggers(f, coloring())
    assert [t.image for t in ts] == [(a,), (b,)]


def test_alpha_one_output_per_disjunct_with_fresh_nulls():
    x, z1, z2 = fresh_variable("x"), fresh_variable("z1"), fresh_variable("z2")
    r = rule([atom("p", x)], [atom("q", x, z1)], [atom("q", x, z2)])
    f = frozenset({atom("p", a)})
    t, = chase.find_triggers(f, r)
    left, right = chase.apply_trigger(f, t)
    assert f < left and f < right
    (nl,), (nr,) = ([at.args[1] for at in o - f] for o in (left, right))
    assert nl != nr and nl not in (z1, z2)


def test_alpha_rejects_foreign_trigger():
    t, = chase.find_triggers({atom("v", a)}, coloring())
    with pytest.raises(ValueError):
        chase.apply_trigger({atom("v", b)}, t)


def test_satisfied_trigger():
    f = {atom("v", a), atom("r", a)}
    t, = chase.find_triggers(f, coloring())
    assert chase.is_satisfied(t, f)
    assert not chase.is_satisfied(t, {atom("v", a)})


def test_tree_is_checked_and_restricted_chase_saturates():
    f = {atom("v", a), atom("v", b)}
    tree = chase.expand_chase(f, [coloring()])
    assert tree.check() and tree.is_saturated()
    assert len(tree.leaves()) == 4 and tree.depth == 2


def test_budget_marks_exhaustion():
    doc = textio.parse((FIXTURES / "triangle.dlp").read_text())
    tree = chase.expand_chase(doc.facts, doc.rules, chase.ChaseBudget(max_depth=1))
    assert tree.exhausted and tree.open_leaves()


def test_transitivity_chase_saturates():
    x, y, z = (fresh_variable(n) for n in "xyz")
    trans = rule([atom("p", x, y), atom("p", y, z)], [atom("p", x, z)])
    f = {atom("p", a, b), atom("p", b, Constant("c"))}
    tree = chase.expand_chase(f, [trans])
    leaf, = tree.leaves()
    assert atom("p", a, Constant("c")) in leaf.label


def test_verdicts():
    doc = textio.parse((FIXTURES / "triangle.dlp").read_text())
    assert chase.chase_entails(doc.facts, doc.rules, doc.ucq).entailed
    doc = textio.parse((FIXTURES / "cycle4.dlp").read_text())
    v = chase.chase_entails(doc.facts, doc.rules, doc.ucq)
    assert v.status == chase.NOT_ENTAILED
    v = chase.chase_entails(textio.parse((FIXTURES / "triangle.dlp").read_text()).facts, doc.rules, doc.ucq,
                            chase.ChaseBudget(max_depth=1))
    assert v.status == chase.UNKNOWN


def test_budget_validation():
    with pytest.raises(ValueError):
        chase.ChaseBudget(max_depth=0)


def test_entailed_within_depth():
    doc = textio.parse((FIXTURES / "triangle.dlp").read_text())
    # branches coloring a and b apart still need c
    assert not chase.entailed_within(doc.facts, doc.rules, doc.ucq, 2)
    assert chase.entailed_within(doc.facts, doc.rules, doc.ucq, 3)


def test_entailed_within_limit():
    doc = textio.parse((FIXTURES / "cycle4.dlp").read_text())
    with pytest.raises(RuntimeError):
        chase.entailed_within(doc.facts, doc.rules, doc.ucq, 4, limit=[3])


def test_derivations_agree_with_bounded_search():
    # a derivation of length k yields a tree of depth <= k, and for k <= 1 the converse holds
    for seed in range(40):
        f, rules, q = harness.gen_instance(harness.GenConfig(seed=seed, max_rules=2))
        for k in (0, 1, 2):
            by_derivation = any(all(entails_some(leaf, q) for leaf in leaves)
                                for leaves in chase.derivation_results(f, list(rules), k))
            bounded = chase.entailed_within(f, list(rules), q, k)
            if by_derivation:
                assert bounded
            if k <= 1:
                assert by_derivation == bounded

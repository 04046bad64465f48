import random

from disjrewrite.homomorphism import (cover, cq_entails, freeze, homomorphism, homomorphisms, isomorphic,
                                      maps_to, remove_more_specific, ucq_entails, ucq_equivalent)
from disjrewrite.model import Constant, atom, fresh_variable, safe_copy

from oracles import hom_backtrack, hom_bruteforce, path_cq

a, b = Constant("a"), Constant("b")


def random_cq(rng, n_atoms, n_vars, preds=(("p", 2), ("q", 1), ("r", 2))):
    vs = [fresh_variable(f"V{i}") for i in range(n_vars)] + [a]
    out = set()
    for _ in range(n_atoms):
        name, k = rng.choice(preds)
        out.add(atom(name, *(rng.choice(vs) for _ in range(k))))
    return frozenset(out)


def test_matches_bruteforce_on_random_pairs():
    rng = random.Random(7)
    agree = positives = 0
    for _ in range(400):
        s = random_cq(rng, rng.randint(1, 4), 3)
        t = random_cq(rng, rng.randint(1, 5), 3)
        expected = hom_bruteforce(s, t)
        assert maps_to(s, t) == expected
        assert (homomorphism(s, t) is not None) == expected
        agree += 1
        positives += expected
    assert agree == 400 and positives > 20


def test_every_enumerated_homomorphism_is_one():
    rng = random.Random(11)
    for _ in range(100):
        s = random_cq(rng, 3, 3)
        t = random_cq(rng, 5, 3)
        seen = set()
        for h in homomorphisms(s, t):
            assert h.atoms(s) <= t
            seen.add(tuple(sorted((v.id, repr(x)) for v, x in h.items())))
        assert bool(seen) == hom_bruteforce(s, t)


def test_partial_binding_is_respected():
    x, y = fresh_variable("x"), fresh_variable("y")
    s = {atom("p", x, y)}
    t = {atom("p", a, b), atom("p", b, a)}
    assert homomorphism(s, t, {x: b})[y] == a
    assert homomorphism(s, t, {x: Constant("c")}) is None


def test_ground_paths_are_incomparable():
    p2, p3 = path_cq("p", "a", "b", 2), path_cq("p", "a", "b", 3)
    assert not maps_to(p2, p3) and not maps_to(p3, p2)
    assert hom_backtrack(p2, p3) == maps_to(p2, p3)


def test_entailment_direction():
    x, y = fresh_variable("x"), fresh_variable("y")
    specific = {atom("p", a, a)}
    general = {atom("p", x, y)}
    assert cq_entails(specific, general)
    assert not cq_entails(general, specific)
    assert ucq_entails([specific], [general, {atom("q", x)}])


def test_cover_keeps_most_general_and_is_equivalent():
    x, y, z = fresh_variable("x"), fresh_variable("y"), fresh_variable("z")
    q = [frozenset({atom("p", x, y)}), frozenset({atom("p", a, z)}),
         frozenset({atom("p", x, x), atom("q", x)}), frozenset({atom("q", y)})]
    c = cover(q)
    assert len(c) == 2
    assert ucq_equivalent(c, q)


def test_cover_collapses_isomorphic_copies():
    q = frozenset({atom("p", fresh_variable(), fresh_variable())})
    copy, _ = safe_copy(q)
    assert len(cover([q, copy])) == 1


def test_remove_more_specific():
    x = fresh_variable("x")
    out = remove_more_specific([frozenset({atom("p", a)}), frozenset({atom("q", a)})],
                               [frozenset({atom("p", x)})])
    assert out == {frozenset({atom("q", a)})}


def test_isomorphism_is_strict():
    x, y = fresh_variable("x"), fresh_variable("y")
    q = {atom("p", x, y), atom("p", y, x)}
    copy, _ = safe_copy(q)
    assert isomorphic(q, copy)
    assert not isomorphic({atom("p", x, y)}, {atom("p", x, x)})


def test_freeze_turns_variables_into_constants():
    x = fresh_variable("x")
    frozen = freeze({atom("p", x, a)})
    assert all(isinstance(t, Constant) for at in frozen for t in at.args)

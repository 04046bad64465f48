"""Piece-unifiers and disjunctive rewriting steps on small hand-made cases.

Run: python demos/worked_examples.py
"""
from disjrewrite import apply_beta, atom, enumerate_disjunctive_piece_unifiers, fresh_variable, rule
from disjrewrite.model import canonical_string


def show(title, q, r):
    print(f"{title}\n  rule:  {r!r}\n  query: {canonical_string(q)}")
    mus = list(enumerate_disjunctive_piece_unifiers([q], r))
    if not mus:
        print("  no piece-unifier")
    for mu in mus:
        unified = " / ".join(", ".join(map(repr, sorted(p.q_sub, key=repr))) for p in mu.parts)
        print(f"  unify {unified}  =>  {canonical_string(apply_beta(mu))}")
    print()


x, y, z, z1, z2 = (fresh_variable(n) for n in ("x", "y", "z", "z1", "z2"))
u, v, w, t = (fresh_variable(n) for n in "uvwt")

# an existential shared by two head atoms
r = rule([atom("p", x, y)], [atom("p1", x, z), atom("p2", y, z)])
show("v is separating, so it cannot meet z", frozenset({atom("p1", u, v), atom("s", v)}), r)
show("u stays outside the piece", frozenset({atom("p1", u, v), atom("s", u)}), r)
show("the whole piece collapses x and y",
     frozenset({atom("p1", u, v), atom("p2", u, w), atom("p1", t, v), atom("s", t)}), r)

# two disjuncts: each one needs its own copy of the query
r = rule([atom("p", x, y)], [atom("r", x, z1)], [atom("r", y, z2)])
show("one copy per disjunct", frozenset({atom("s", u), atom("r", u, v)}), r)

r = rule([atom("p", x, y)], [atom("t1", x)], [atom("t2", y)])
show("a query that keeps growing", frozenset({atom("t1", u), atom("t2", u)}), r)

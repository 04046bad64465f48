"""An infinite family of pairwise incomparable rewritings.

For a connected two-disjunct rule whose disjuncts are not interchangeable,
the query H1 copy + link + H2 copy has rewritings that chain ever more
copies of the body, and no finite UCQ covers them all.

Run: python demos/nonrewritable_family.py
"""
import itertools

from disjrewrite import Budget, atom, cq_entails, fresh_variable, rewrite, rule
from disjrewrite.constructions import build_nonfus_family
from disjrewrite.model import canonical_string

x, y = fresh_variable("x"), fresh_variable("y")
r = rule([atom("p0", x, y)], [atom("t1", x)], [atom("t2", y)], name="r")
family = build_nonfus_family(r, 4)
for i, q in enumerate(family):
    print(f"Q{i}: {canonical_string(q)}")

incomparable = all(not cq_entails(a, b) and not cq_entails(b, a) for a, b in itertools.combinations(family, 2))
print(f"\npairwise incomparable: {incomparable}")

out = rewrite([family[0]], [r], Budget(max_iterations=4), keep_generated=True)
pool = set().union(*out.generated) | set(out.result)
found = [any(cq_entails(q, c) and cq_entails(c, q) for c in pool) for q in family]
print(f"found by 4 rewriting iterations: {found}; status {out.status}")

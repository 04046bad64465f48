"""From a datalog program to a mapping whose S-rewriting mirrors its rewriting.

Run: python demos/reduction.py
"""
from disjrewrite import atom, fresh_variable, rule
from disjrewrite.constructions import build_reduction, reduction_spot_check, reverse, unfold_closure
from disjrewrite.model import canonical_string
from disjrewrite.textio import format_rule

x, y, u = fresh_variable("X"), fresh_variable("Y"), fresh_variable("U")
program = [rule([atom("p", x, y), atom("q", x)], [atom("q", y)], name="r1")]
red = build_reduction({atom("q", u)}, program)

print("queries of the reduction")
for name, q in red.named_queries():
    print(f"  {name}: {canonical_string(q)}")
print("mapping")
for m in red.mapping.rules:
    print(f"  {format_rule(m)}")

print("\nreverse recovers the inputs")
print(f"  {canonical_string(reverse(red.query_q, red))}")
print(f"  {format_rule(reverse(red.reduced[0].query, red))}")

ok, missing = reduction_spot_check(red)
print(f"\none-step rewritings of q reappear in the reduction's rewriting: {ok}")

x, y, z = (fresh_variable(n) for n in "XYZ")
trans = rule([atom("p", x, y), atom("p", y, z)], [atom("p", x, z)], name="t")
print("\nunfolding transitivity twice")
for r in unfold_closure([trans], 2):
    print(f"  {format_rule(r)}")

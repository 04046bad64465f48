"""Command-line interface: ``disjrewrite <subcommand> ...``.

Exit status: 0 success, Complete or Entailed; 2 NotEntailed; 3 budget
exhausted or Unknown; 1 usage or input error (also failing checks).
"""
from __future__ import annotations

import argparse
import json
import sys
from typing import List, Optional, Tuple

from . import chase, constructions, harness, rewriting, textio
from .model import RuleSet

EXIT_OK, EXIT_ERROR, EXIT_NOT_ENTAILED, EXIT_BUDGET = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _positive(kind):
    def parse(s):
        try:
            v = kind(s)
        except ValueError:
            raise argparse.ArgumentTypeError(f"not a number: {s!r}")
        if v <= 0:
            raise argparse.ArgumentTypeError(f"must be positive: {s!r}")
        return v
    return parse


def _non_negative(s):
    try:
        v = int(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {s!r}")
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be non-negative: {s!r}")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="disjrewrite", description="UCQ rewriting with disjunctive existential rules.")
    sub = p.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    io = _Parser(add_help=False)
    io.add_argument("-i", "--input", required=True, metavar="FILE", help="input document")
    io.add_argument("-o", "--output", metavar="OUT", help="write the result here instead of stdout")

    out = _Parser(add_help=False)
    out.add_argument("-o", "--output", metavar="OUT", help="write the result here instead of stdout")

    fmt = _Parser(add_help=False)
    fmt.add_argument("--json", action="store_true", help="JSON summary instead of text")

    budget = _Parser(add_help=False)
    d = rewriting.Budget()
    budget.add_argument("--max-iter", type=_positive(int), default=d.max_iterations)
    budget.add_argument("--max-atoms", type=_positive(int), default=d.max_cq_atoms)
    budget.add_argument("--max-generated", type=_positive(int), default=d.max_generated)
    budget.add_argument("--time-limit", type=_positive(float), default=None, metavar="SECS",
                        help="wall-clock limit, checked between iterations")
    budget.add_argument("--single-piece", action="store_true",
                        help="only single-piece unifiers (incomplete)")

    cb = _Parser(add_help=False)
    c = chase.ChaseBudget()
    cb.add_argument("--depth", type=_positive(int), default=c.max_depth)
    cb.add_argument("--max-nodes", type=_positive(int), default=c.max_nodes)
    cb.add_argument("--oblivious", action="store_true", help="also apply satisfied triggers")

    sub.add_parser("rewrite", parents=[io, fmt, budget], help="breadth-first UCQ rewriting")
    sub.add_parser("s-rewrite", parents=[io, fmt, budget], help="rewriting with a mapping, projected to @source")
    sub.add_parser("chase", parents=[io, cb], help="print a disjunctive chase tree")
    sub.add_parser("entail", parents=[io, fmt, cb], help="decide entailment of the queries with the chase")

    ck = sub.add_parser("check", parents=[out], help="run the property suites")
    ck.add_argument("--seed", type=_non_negative, default=0)
    ck.add_argument("--count", type=_positive(int), default=200)
    ck.add_argument("--depth", type=_positive(int), default=3)
    ck.add_argument("--invariant-count", type=_non_negative, default=20, metavar="N",
                    help="instances for the rewriting-loop invariant suite (0 skips it)")

    g = sub.add_parser("gen-nonfus", parents=[io], help="build the non-rewritable query family of a rule")
    g.add_argument("--rule", required=True, metavar="NAME")
    g.add_argument("--family", type=_non_negative, default=0, metavar="K")

    g = sub.add_parser("gen-reduction", parents=[io], help="build the mapping reduction of a datalog instance")
    g.add_argument("--query", required=True, metavar="NAME")

    g = sub.add_parser("unfold", parents=[io], help="bounded unfolding closure of datalog rules")
    g.add_argument("--max-comp", type=_non_negative, required=True, metavar="K")
    return p


def _read(path: str) -> textio.Document:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror}")
    return textio.parse(text)


def _budget(args) -> rewriting.Budget:
    return rewriting.Budget(args.max_iter, args.max_atoms, args.max_generated, args.time_limit)


def _chase_budget(args) -> chase.ChaseBudget:
    return chase.ChaseBudget(args.depth, args.max_nodes, not args.oblivious)


def _rewrite_text(out: rewriting.RewritingOutcome) -> str:
    head = f"% iterations: {out.iterations}, generated: {out.generated_count}, cover: {len(out.result)}\n"
    return head + textio.serialize_ucq(out.result, out.status)


def _rewrite_status(out) -> int:
    return EXIT_OK if out.complete else EXIT_BUDGET


def cmd_rewrite(args) -> Tuple[str, int]:
    doc = _read(args.input)
    if not doc.queries:
        raise UsageError("the document has no @queries")
    if args.single_piece:
        print("warning: single-piece mode is incomplete; the result may miss rewritings",
              file=sys.stderr)
    out = rewriting.rewrite(doc.ucq, doc.rules, _budget(args), single_piece=args.single_piece)
    return (textio.export_json(out) if args.json else _rewrite_text(out)), _rewrite_status(out)


def cmd_s_rewrite(args) -> Tuple[str, int]:
    doc = _read(args.input)
    if doc.source is None:
        raise UsageError("s-rewrite needs an @source declaration")
    if not doc.queries:
        raise UsageError("the document has no @queries")
    m = doc.mapping()
    if args.single_piece:
        print("warning: single-piece mode is incomplete; the result may miss rewritings",
              file=sys.stderr)
    try:
        out = rewriting.s_rewrite(doc.ucq, m, _budget(args), single_piece=args.single_piece)
    except rewriting.InvalidQuery as e:
        raise UsageError(str(e))
    return (textio.export_json(out) if args.json else _rewrite_text(out)), _rewrite_status(out)


def cmd_chase(args) -> Tuple[str, int]:
    doc = _read(args.input)
    tree = chase.expand_chase(doc.facts, doc.rules, _chase_budget(args))
    return textio.serialize_tree(tree), (EXIT_BUDGET if tree.exhausted else EXIT_OK)


def cmd_entail(args) -> Tuple[str, int]:
    doc = _read(args.input)
    if not doc.queries:
        raise UsageError("the document has no @queries")
    v = chase.chase_entails(doc.facts, doc.rules, doc.ucq, _chase_budget(args))
    code = {chase.ENTAILED: EXIT_OK, chase.NOT_ENTAILED: EXIT_NOT_ENTAILED}.get(v.status, EXIT_BUDGET)
    if args.json:
        return textio.export_json(v), code
    s = v.stats()
    return f"{v.status}\n% nodes: {s['nodes']}, depth: {s['depth']}, open leaves: {s['open_leaves']}\n", code


def cmd_check(args) -> Tuple[str, int]:
    report = harness.run_suite(args.count, args.seed, args.depth)
    inv = harness.run_invariant_suite(args.invariant_count, args.seed) if args.invariant_count else []
    data = json.loads(report.to_json())
    bad = [{"seed": s, "iterations": [i + 1 for i, ok in enumerate(v) if not ok]} for s, v in inv if not all(v)]
    data["invariant"] = {"checked": len(inv), "failures": bad}
    data["ok"] = report.ok and not bad
    return json.dumps(data, indent=2, sort_keys=True) + "\n", (EXIT_OK if data["ok"] else EXIT_ERROR)


def cmd_gen_nonfus(args) -> Tuple[str, int]:
    doc = _read(args.input)
    try:
        r = doc.rules.by_name(args.rule)
    except KeyError:
        raise UsageError(f"no rule named {args.rule!r}")
    family = constructions.build_nonfus_family(r, args.family)
    out = textio.Document(rules=RuleSet([r]), queries=tuple((f"q{i}", q) for i, q in enumerate(family)))
    return textio.serialize_document(out), EXIT_OK


def cmd_gen_reduction(args) -> Tuple[str, int]:
    doc = _read(args.input)
    try:
        q = doc.query(args.query)
    except KeyError:
        raise UsageError(f"no query named {args.query!r}")
    red = constructions.build_reduction(q, doc.rules)
    source = tuple(sorted(p.name for p in red.source))
    out = textio.Document(rules=red.mapping.rules, queries=red.named_queries(), source=source)
    return textio.serialize_document(out), EXIT_OK


def cmd_unfold(args) -> Tuple[str, int]:
    doc = _read(args.input)
    closure = constructions.unfold_closure(doc.rules, args.max_comp)
    return textio.serialize_document(textio.Document(rules=closure)), EXIT_OK


COMMANDS = {
    "rewrite": cmd_rewrite, "s-rewrite": cmd_s_rewrite, "chase": cmd_chase, "entail": cmd_entail,
    "check": cmd_check, "gen-nonfus": cmd_gen_nonfus, "gen-reduction": cmd_gen_reduction,
    "unfold": cmd_unfold,
}


def run(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        text, code = COMMANDS[args.command](args)
    except (UsageError, ValueError) as e:
        # parse errors, construction preconditions, invalid mappings
        print(f"disjrewrite {args.command}: error: {e}", file=sys.stderr)
        return EXIT_ERROR
    if getattr(args, "output", None):
        try:
            with open(args.output, "w", encoding="utf-8") as fh:
                fh.write(text)
        except OSError as e:
            print(f"disjrewrite {args.command}: error: cannot write {args.output}: {e.strerror}",
                  file=sys.stderr)
            return EXIT_ERROR
    else:
        sys.stdout.write(text)
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()

"""Text format for facts, rules and queries; JSON export of results.

::

    @source v, e .
    @facts
    v(1). v(2). e(1,2).
    @rules
    color: v(X) -> g(X) | r(X).
    @queries
    q1: ? :- g(U), e(U,W), g(W).

Identifiers starting with an uppercase letter are variables; lowercase
identifiers and digit strings are predicates or constants.  ``%`` starts a
comment.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Optional, Tuple

from .model import (CQ, UCQ, Atom, Constant, DisjunctiveRule, Mapping, Predicate, RuleSet, Variable,
                    canonical_string, fresh_variable, ordered_vars, preds_of, sorted_atoms, sorted_cqs)


class ParseError(ValueError):
    def __init__(self, message: str, line: int = 0, column: int = 0):
        super().__init__(f"line {line}, column {column}: {message}" if line else message)
        self.message = message
        self.line = line
        self.column = column


@dataclass
class Document:
    facts: FrozenSet[Atom] = frozenset()
    rules: RuleSet = field(default_factory=RuleSet)
    queries: Tuple[Tuple[str, CQ], ...] = ()
    source: Optional[Tuple[str, ...]] = None

    @property
    def ucq(self) -> UCQ:
        return frozenset(q for _, q in self.queries)

    def query(self, name: str) -> CQ:
        for n, q in self.queries:
            if n == name:
                return q
        raise KeyError(name)

    def predicates(self) -> set:
        out = preds_of(self.facts) | self.rules.predicates()
        for _, q in self.queries:
            out |= preds_of(q)
        return out

    def mapping(self) -> Mapping:
        """The rules as a mapping from the @source predicates to the rest."""
        if self.source is None:
            raise ValueError("document has no @source section")
        names = set(self.source)
        preds = self.predicates()
        return Mapping(self.rules, {p for p in preds if p.name in names},
                       {p for p in preds if p.name not in names})


# --- lexer -------------------------------------------------------------------

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r\n]+|%[^\n]*)
  | (?P<section>@[A-Za-z_]+)
  | (?P<arrow>->)
  | (?P<neck>:-)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*|[0-9]+)
  | (?P<punct>[(),.:|?])
""", re.VERBOSE)


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str) -> List[_Tok]:
    toks = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind != "ws":
            toks.append(_Tok(m.group(kind) if kind == "punct" else kind, m.group(), line, pos - line_start + 1))
        for k, ch in enumerate(m.group()):
            if ch == "\n":
                line += 1
                line_start = pos + k + 1
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - line_start + 1))
    return toks


def _is_variable_name(s: str) -> bool:
    return s[0].isupper() or s[0] == "_"


# --- parser ------------------------------------------------------------------

class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0
        self.arity: Dict[str, int] = {}
        self.facts: set = set()
        self.rules: List[DisjunctiveRule] = []
        self.rule_toks: List[_Tok] = []
        self.queries: List[Tuple[str, CQ]] = []
        self.source: Optional[List[str]] = None
        self.scope: Dict[str, Variable] = {}

    def peek(self, k: int = 0) -> _Tok:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def next(self) -> _Tok:
        t = self.peek()
        self.i += 1
        return t

    def expect(self, kind: str, what: Optional[str] = None) -> _Tok:
        t = self.next()
        if t.kind != kind:
            raise ParseError(f"expected {what or repr(kind)}, found {t.text or 'end of input'!r}", t.line, t.col)
        return t

    def parse(self) -> Document:
        section = None
        while self.peek().kind != "eof":
            t = self.peek()
            if t.kind == "section":
                self.next()
                section = t.text[1:]
                if section == "source":
                    self.parse_source(t)
                elif section not in ("facts", "rules", "queries"):
                    raise ParseError(f"unknown section {t.text}", t.line, t.col)
                continue
            if section is None:
                raise ParseError("statement outside of a section", t.line, t.col)
            if section == "facts":
                self.parse_facts()
            elif section == "rules":
                self.parse_rule()
            elif section == "queries":
                self.parse_query()
            else:
                raise ParseError("statement after @source", t.line, t.col)
        doc = Document(frozenset(self.facts), RuleSet(self.rules), tuple(self.queries),
                       tuple(self.source) if self.source is not None else None)
        if doc.source is not None:
            self.check_mapping(doc)
        return doc

    def parse_source(self, at: _Tok):
        if self.source is not None:
            raise ParseError("duplicate @source section", at.line, at.col)
        names = [self.expect("ident", "predicate name").text]
        while self.peek().kind == ",":
            self.next()
            names.append(self.expect("ident", "predicate name").text)
        self.expect(".", "'.' after @source list")
        for n in names:
            if _is_variable_name(n):
                t = self.toks[self.i - 2]
                raise ParseError(f"{n!r} is not a predicate name", t.line, t.col)
        self.source = names

    def check_mapping(self, doc: Document):
        names = set(doc.source)
        for r, tok in zip(doc.rules, self.rule_toks):
            if any(a.predicate.name not in names for a in r.body):
                raise ParseError("rule body uses a predicate outside @source", tok.line, tok.col)
            if any(a.predicate.name in names for h in r.head for a in h):
                raise ParseError("rule head uses a @source predicate", tok.line, tok.col)

    def term(self):
        t = self.expect("ident", "term")
        if _is_variable_name(t.text):
            v = self.scope.get(t.text)
            if v is None:
                v = self.scope[t.text] = fresh_variable(t.text)
            return v
        return Constant(t.text)

    def atom(self) -> Atom:
        t = self.expect("ident", "predicate")
        if _is_variable_name(t.text):
            raise ParseError(f"predicate name {t.text!r} must start with a lowercase letter or digit", t.line, t.col)
        self.expect("(", "'('")
        args = [self.term()]
        while self.peek().kind == ",":
            self.next()
            args.append(self.term())
        self.expect(")", "')'")
        known = self.arity.setdefault(t.text, len(args))
        if known != len(args):
            raise ParseError(f"predicate {t.text} used with arity {len(args)} and {known}", t.line, t.col)
        return Atom(Predicate(t.text, len(args)), tuple(args))

    def atom_list(self) -> List[Atom]:
        atoms = [self.atom()]
        while self.peek().kind == ",":
            self.next()
            atoms.append(self.atom())
        return atoms

    def label(self) -> Optional[str]:
        if self.peek().kind == "ident" and self.peek(1).kind == ":":
            name = self.next().text
            self.next()
            return name
        return None

    def parse_facts(self):
        self.scope = {}
        start = self.peek()
        atoms = self.atom_list()
        self.expect(".", "'.' after facts")
        for a in atoms:
            if any(isinstance(t, Variable) for t in a.args):
                raise ParseError(f"fact {a!r} is not ground", start.line, start.col)
        self.facts.update(atoms)

    def parse_rule(self):
        self.scope = {}
        start = self.peek()
        name = self.label() or f"r{len(self.rules) + 1}"
        body = self.atom_list()
        self.expect("arrow", "'->'")
        head = [self.atom_list()]
        while self.peek().kind == "|":
            self.next()
            head.append(self.atom_list())
        self.expect(".", "'.' after rule")
        if any(r.name == name for r in self.rules):
            raise ParseError(f"duplicate rule name {name!r}", start.line, start.col)
        self.rules.append(DisjunctiveRule(tuple(body), tuple(map(tuple, head)), name))
        self.rule_toks.append(start)

    def parse_query(self):
        self.scope = {}
        start = self.peek()
        name = self.label() or f"q{len(self.queries) + 1}"
        self.expect("?", "'?'")
        self.expect("neck", "':-'")
        atoms = self.atom_list()
        self.expect(".", "'.' after query")
        if any(n == name for n, _ in self.queries):
            raise ParseError(f"duplicate query name {name!r}", start.line, start.col)
        self.queries.append((name, frozenset(atoms)))


def parse(text: str) -> Document:
    """Parse a document; raises ParseError with line and column on bad input."""
    if text.startswith("﻿"):
        text = text[1:]
    return _Parser(text).parse()


# --- serialization -------------------------------------------------------------

_VAR_NAME = re.compile(r"[A-Z][A-Za-z0-9_]*\Z")


def _names_for(variables: Iterable[Variable]) -> Dict[Variable, str]:
    """Keep readable display names when they are valid and unambiguous."""
    variables = list(variables)
    counts: Dict[str, int] = {}
    for v in variables:
        if v.name and _VAR_NAME.match(v.name):
            counts[v.name] = counts.get(v.name, 0) + 1
    out: Dict[Variable, str] = {}
    taken = {n for n, c in counts.items() if c == 1}
    k = 0
    for v in variables:
        if v.name and counts.get(v.name) == 1:
            out[v] = v.name
            continue
        while f"X{k}" in taken:
            k += 1
        out[v] = f"X{k}"
        taken.add(out[v])
    return out


def _fmt(a: Atom, names: Dict[Variable, str]) -> str:
    args = ",".join(names[t] if isinstance(t, Variable) else t.name for t in a.args)
    return f"{a.predicate.name}({args})"


def _fmt_atoms(atoms, names) -> str:
    return ", ".join(_fmt(a, names) for a in atoms)


def format_rule(r: DisjunctiveRule) -> str:
    names = _names_for(ordered_vars(list(r.body) + [a for h in r.head for a in h]))
    head = " | ".join(_fmt_atoms(h, names) for h in r.head)
    prefix = f"{r.name}: " if r.name else ""
    return f"{prefix}{_fmt_atoms(r.body, names)} -> {head}."


def format_cq(q: Iterable[Atom], name: Optional[str] = None) -> str:
    prefix = f"{name}: " if name else ""
    return f"{prefix}? :- {canonical_string(q)}."


def serialize_ucq(ucq: Iterable[CQ], status: Optional[str] = None) -> str:
    lines = []
    if status is not None:
        lines.append(f"% status: {status}")
    cqs = sorted_cqs(set(ucq))
    if not cqs:
        lines.append("% empty UCQ")
    lines.extend(format_cq(q) for q in cqs)
    return "\n".join(lines) + "\n"


def serialize_document(doc: Document) -> str:
    out = []
    if doc.source is not None:
        out.append(f"@source {', '.join(doc.source)} .")
    if doc.facts:
        out.append("@facts")
        out.extend(f"{_fmt(a, {})}." for a in sorted_atoms(doc.facts))
    if doc.rules:
        out.append("@rules")
        out.extend(format_rule(r) for r in doc.rules)
    if doc.queries:
        out.append("@queries")
        out.extend(format_cq(q, n) for n, q in doc.queries)
    return "\n".join(out) + "\n"


def serialize_tree(tree) -> str:
    mode = "restricted" if tree.restricted else "oblivious"
    out = [f"% derivation tree: {len(tree.nodes)} nodes, depth {tree.depth}, {mode}"]

    def term(t):
        return t.name if isinstance(t, Constant) else (t.name or f"N{t.id}")

    def atoms(s):
        return ", ".join(f"{a.predicate.name}({','.join(term(t) for t in a.args)})" for a in sorted_atoms(s))

    def walk(i, indent):
        n = tree.nodes[i]
        pad = "  " * indent
        if n.parent is None:
            out.append(f"{pad}node {n.id} [{n.state}]: {atoms(n.label) or '(empty)'}")
        else:
            added = n.label - tree.nodes[n.parent].label
            out.append(f"{pad}node {n.id} [{n.state}]: + {atoms(added) or '(nothing new)'}")
        if n.trigger is not None:
            t = n.trigger
            binding = ", ".join(f"{v.name or v.id}->{term(x)}" for v, x in t.hom.items())
            out.append(f"{pad}  apply {t.rule.name or t.rule_index} [{binding}]")
        for c in n.children:
            walk(c, indent + 1)

    walk(0, 0)
    return "\n".join(out) + "\n"


def serialize(obj, status: Optional[str] = None) -> str:
    """Text for a Document, a UCQ, a derivation tree or a rewriting outcome."""
    from .chase import ChaseVerdict, DerivationTree
    from .rewriting import RewritingOutcome
    if isinstance(obj, Document):
        return serialize_document(obj)
    if isinstance(obj, DerivationTree):
        return serialize_tree(obj)
    if isinstance(obj, ChaseVerdict):
        return f"% verdict: {obj.status}\n" + serialize_tree(obj.tree)
    if isinstance(obj, RewritingOutcome):
        return serialize_ucq(obj.result, obj.status)
    if isinstance(obj, DisjunctiveRule):
        return format_rule(obj) + "\n"
    return serialize_ucq(obj, status)


def export_json(outcome) -> str:
    from .chase import ChaseVerdict
    if isinstance(outcome, ChaseVerdict):
        data = {"status": outcome.status, "iterations": outcome.tree.depth,
                "generated_count": len(outcome.tree.nodes), "cover_size": 0, "cqs": [],
                "elapsed_ms": round(outcome.elapsed * 1000, 3)}
    else:
        data = {"status": outcome.status, "iterations": outcome.iterations,
                "generated_count": outcome.generated_count, "cover_size": len(outcome.result),
                "cqs": [canonical_string(q) for q in sorted_cqs(outcome.result)],
                "elapsed_ms": round(outcome.elapsed * 1000, 3)}
    return json.dumps(data, indent=2) + "\n"


JSON_FIELDS = ("status", "iterations", "generated_count", "cover_size", "cqs", "elapsed_ms")
JSON_STATUSES = ("complete", "budget_exhausted", "entailed", "not_entailed", "unknown")

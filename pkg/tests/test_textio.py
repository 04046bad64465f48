import json

import pytest

from disjrewrite import rewriting, textio
from disjrewrite.chase import chase_entails
from disjrewrite.model import Constant, Predicate, Variable

DOC = """\
% colorability
@source v, e .
@facts
v(a). e(a,b).
@rules
color: v(X) -> g(X) | r(X).
he: e(X,Y) -> he(X,Y).
@queries
gg: ? :- g(U), he(U,W), g(W).
"""


def test_parse_sections():
    doc = textio.parse(DOC)
    assert doc.source == ("v", "e")
    assert {a.predicate.name for a in doc.facts} == {"v", "e"}
    assert [r.name for r in doc.rules] == ["color", "he"]
    assert doc.rules.by_name("color").head[0][0].predicate == Predicate("g", 1)
    (name, q), = doc.queries
    assert name == "gg" and len(q) == 3
    assert all(isinstance(t, Variable) for at in q for t in at.args)


def test_mapping_from_source():
    m = textio.parse(DOC).mapping()
    assert {p.name for p in m.source} == {"v", "e"}
    assert {p.name for p in m.target} == {"g", "r", "he"}


def test_round_trip_is_stable():
    doc = textio.parse(DOC)
    text = textio.serialize_document(doc)
    assert textio.serialize_document(textio.parse(text)) == text


def test_digits_are_constants():
    doc = textio.parse("@facts\ne(1,2).\n")
    assert next(iter(doc.facts)).args == (Constant("1"), Constant("2"))


@pytest.mark.parametrize("text, fragment", [
    ("p(a).", "outside of a section"),
    ("@facts\np(X).", "not ground"),
    ("@facts\np(a). p(a,b).", "arity"),
    ("@rules\nr: p(X) -> q(X).\nr: q(X) -> p(X).", "duplicate rule name"),
    ("@queries\nq: ? :- p(U).\nq: ? :- p(U).", "duplicate query name"),
    ("@bogus\n", "unknown section"),
    ("@facts\np(a)", "expected"),
    ("@facts\np(a) $", "unexpected character"),
    ("@source p .\n@rules\nr: q(X) -> p(X).", "outside @source"),
])
def test_parse_errors(text, fragment):
    with pytest.raises(textio.ParseError) as e:
        textio.parse(text)
    assert fragment in str(e.value)
    assert e.value.line >= 1


def test_error_position():
    with pytest.raises(textio.ParseError) as e:
        textio.parse("@facts\nv(a).\nv(X).\n")
    assert e.value.line == 3


def test_serialize_ucq_sorted_with_status():
    doc = textio.parse("@queries\nb: ? :- q(U).\na: ? :- p(U,V).\n")
    text = textio.serialize_ucq(doc.ucq, "complete")
    assert text == "% status: complete\n? :- p(V0,V1).\n? :- q(V0).\n"
    assert textio.serialize_ucq([]) == "% empty UCQ\n"


def test_json_fields():
    doc = textio.parse(DOC)
    out = rewriting.rewrite(doc.ucq, doc.rules, rewriting.Budget(max_iterations=1))
    data = json.loads(textio.export_json(out))
    assert tuple(data) == textio.JSON_FIELDS
    assert data["status"] in textio.JSON_STATUSES
    assert data["cover_size"] == len(data["cqs"])
    verdict = json.loads(textio.export_json(chase_entails(doc.facts, doc.rules, doc.ucq)))
    assert verdict["status"] in textio.JSON_STATUSES


def test_serialize_dispatch():
    doc = textio.parse(DOC)
    assert textio.serialize(doc) == textio.serialize_document(doc)
    assert textio.serialize(doc.rules[0]).startswith("color: v(X) -> g(X) | r(X)")

from __future__ import annotations

import pytest

from vjournal.errors import QueryParseError
from vjournal.query import And, AuthorPrefix, Not, Or, Phrase, Term, has_positive, parse_author_query, parse_query


def test_implicit_and():
    assert str(parse_query("dark energy")) == "And[Term(any,dark), Term(any,energy)]"


def test_scoped_group_or_and_not():
    q = parse_query("title:(weak OR strong) lensing NOT cluster")
    assert q == And(
        (
            Or((Term("title", "weak"), Term("title", "strong"))),
            Term("any", "lensing"),
            Not(Term("any", "cluster")),
        )
    )
    assert str(q) == "And[Or[Term(title,weak), Term(title,strong)], Term(any,lensing), Not[Term(any,cluster)]]"


def test_explicit_and_and_precedence():
    assert parse_query("a1 AND b1 OR c1") == Or((And((Term("any", "a1"), Term("any", "b1"))), Term("any", "c1")))


def test_phrases_and_authors():
    assert parse_query('"weak lensing"') == Phrase("any", ("weak", "lensing"))
    assert parse_query("abstract:x-ray") == Phrase("abstract", ("ray",)) or parse_query("abstract:x-ray") == Term("abstract", "ray")
    assert parse_query('author:"Varga, M. J."') == AuthorPrefix("varga", "mj")
    assert parse_query('author:"Varga"') == AuthorPrefix("varga", None)
    assert parse_query("category:astro-ph") == Phrase("category", ("astro", "ph"))


def test_stopwords_drop_out():
    assert parse_query("the dark") == Term("any", "dark")
    with pytest.raises(QueryParseError, match="empty query"):
        parse_query("the of")


def test_author_query_list():
    assert parse_author_query("Varga, M; Okafor, E") == Or((AuthorPrefix("varga", "m"), AuthorPrefix("okafor", "e")))


@pytest.mark.parametrize(
    "text, message, span",
    [
        ("NOT cluster", "pure negation", (0, 11)),
        ("((dark", "unbalanced parenthesis", None),
        ("dark)", "unbalanced parenthesis", (4, 5)),
        ('"dark energy', "unbalanced quote", (0, 12)),
        ("journal:apj", "unknown field", (0, 7)),
        ("dark OR", "expected a term", None),
        ("dark NOT", "NOT without operand", (5, 8)),
        ("", "empty query", (0, 0)),
        ("title:()", "empty group", (7, 8)),
    ],
)
def test_parse_errors_name_span(text, message, span):
    with pytest.raises(QueryParseError, match=message) as exc:
        parse_query(text)
    got = exc.value.span
    if span is not None:
        assert got == span
    lo, hi = got
    assert 0 <= lo <= hi <= len(text)


def test_positive_support():
    assert has_positive(And((Term("any", "a"), Not(Term("any", "b")))))
    assert not has_positive(Or((Term("any", "a"), Not(Term("any", "b")))))
    with pytest.raises(QueryParseError, match="pure negation"):
        parse_query("dark OR NOT energy")

"""Boolean query language.

Grammar::

    query    := or_expr EOF
    or_expr  := and_expr ("OR" and_expr)*
    and_expr := unary (["AND"] unary)*          adjacent terms are ANDed
    unary    := "NOT" unary | primary
    primary  := "(" or_expr ")"
              | FIELD ":" ( "(" or_expr ")" | PHRASE | WORD )
              | PHRASE | WORD

    FIELD    := title | abstract | author | category | any
    PHRASE   := '"' ... '"'

Operators are upper case. A word is tokenized like indexed text: a word that
folds to several tokens (``dark-energy``) becomes a phrase, one that folds to
nothing (a stopword) is dropped. Under the ``author`` field a quoted string is
an author name, ``"Last, F"`` or ``"Last"``, matched by exact last name and
initial prefix.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

from .errors import QueryParseError
from .text import normalize_initials, normalize_last, tokenize

FIELDS = ("title", "abstract", "author", "category", "any")
TEXT_FIELDS = ("title", "abstract", "author", "category")


@dataclass(frozen=True)
class Term:
    field: str
    token: str

    def __str__(self):
        return f"Term({self.field},{self.token})"


@dataclass(frozen=True)
class Phrase:
    field: str
    tokens: tuple[str, ...]

    def __str__(self):
        return f"Phrase({self.field},{' '.join(self.tokens)})"


@dataclass(frozen=True)
class AuthorPrefix:
    last: str
    first_initials: str | None = None

    def __str__(self):
        if self.first_initials:
            return f"AuthorPrefix({self.last},{self.first_initials})"
        return f"AuthorPrefix({self.last})"


@dataclass(frozen=True)
class And:
    children: tuple[QueryAst, ...]

    def __str__(self):
        return "And[" + ", ".join(map(str, self.children)) + "]"


@dataclass(frozen=True)
class Or:
    children: tuple[QueryAst, ...]

    def __str__(self):
        return "Or[" + ", ".join(map(str, self.children)) + "]"


@dataclass(frozen=True)
class Not:
    child: QueryAst

    def __str__(self):
        return f"Not[{self.child}]"


QueryAst = Union[Term, Phrase, AuthorPrefix, And, Or, Not]
Leaf = (Term, Phrase, AuthorPrefix)


def has_positive(node: QueryAst) -> bool:
    """True when the node constrains matches without reference to the complement."""
    if isinstance(node, Not):
        return False
    if isinstance(node, And):
        return any(has_positive(c) for c in node.children)
    if isinstance(node, Or):
        return all(has_positive(c) for c in node.children)
    return True


def positive_leaves(node: QueryAst) -> list:
    """Leaves not under any NOT, in left-to-right order."""
    if isinstance(node, Not):
        return []
    if isinstance(node, (And, Or)):
        out = []
        for c in node.children:
            out.extend(positive_leaves(c))
        return out
    return [node]


def make_and(children) -> QueryAst | None:
    flat = []
    for c in children:
        if c is None:
            continue
        flat.extend(c.children if isinstance(c, And) else (c,))
    if not flat:
        return None
    return flat[0] if len(flat) == 1 else And(tuple(flat))


def make_or(children) -> QueryAst | None:
    flat = []
    for c in children:
        if c is None:
            continue
        flat.extend(c.children if isinstance(c, Or) else (c,))
    if not flat:
        return None
    return flat[0] if len(flat) == 1 else Or(tuple(flat))


def parse_author_name(raw: str) -> AuthorPrefix | None:
    last, _, initials = raw.partition(",")
    last = normalize_last(last)
    if not last:
        return None
    return AuthorPrefix(last, normalize_initials(initials) or None)


# -- lexer -------------------------------------------------------------------

_LEX = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<lparen>\()
  | (?P<rparen>\))
  | (?P<quoted>"[^"]*")
  | (?P<openquote>")
  | (?P<field>[A-Za-z_]+:)
  | (?P<word>[^\s()"]+)
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Tok:
    kind: str
    value: str
    start: int
    end: int


def _lex(text: str) -> list[_Tok]:
    toks = []
    pos = 0
    while pos < len(text):
        m = _LEX.match(text, pos)
        kind = m.lastgroup
        if kind == "openquote":
            raise QueryParseError("unbalanced quote", text, (pos, len(text)))
        if kind != "ws":
            value = m.group()
            if kind == "word" and value in ("AND", "OR", "NOT"):
                kind = value
            toks.append(_Tok(kind, value, m.start(), m.end()))
        pos = m.end()
    toks.append(_Tok("eof", "", len(text), len(text)))
    return toks


# -- parser ------------------------------------------------------------------


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _lex(text)
        self.i = 0

    def peek(self) -> _Tok:
        return self.toks[self.i]

    def take(self) -> _Tok:
        t = self.toks[self.i]
        self.i += 1
        return t

    def error(self, message: str, tok: _Tok):
        if tok.kind == "eof" and self.i > 0:
            # point at the last real token rather than an empty span
            prev = self.toks[max(0, min(self.i, len(self.toks) - 1) - 1)]
            tok = prev if prev.kind != "eof" else tok
        raise QueryParseError(message, self.text, (tok.start, tok.end))

    def parse(self) -> QueryAst:
        if self.peek().kind == "eof":
            raise QueryParseError("empty query", self.text, (0, len(self.text)))
        node = self.or_expr("any")
        tok = self.peek()
        if tok.kind == "rparen":
            self.error("unbalanced parenthesis", tok)
        if tok.kind != "eof":
            self.error("unexpected token", tok)
        span = (0, len(self.text))
        if node is None:
            raise QueryParseError("empty query", self.text, span)
        if not has_positive(node):
            raise QueryParseError("pure negation", self.text, span)
        return node

    def or_expr(self, field: str):
        parts = [self.and_expr(field)]
        while self.peek().kind == "OR":
            self.take()
            parts.append(self.and_expr(field))
        return make_or(parts)

    def and_expr(self, field: str):
        first = self.peek()
        if first.kind in ("eof", "rparen", "OR", "AND"):
            self.error("expected a term", first)
        parts = [self.unary(field)]
        while self.peek().kind not in ("eof", "rparen", "OR"):
            if self.peek().kind == "AND":
                self.take()
                if self.peek().kind in ("eof", "rparen", "OR", "AND"):
                    self.error("expected a term", self.peek())
            parts.append(self.unary(field))
        return make_and(parts)

    def unary(self, field: str):
        tok = self.peek()
        if tok.kind == "NOT":
            self.take()
            if self.peek().kind in ("eof", "rparen", "OR", "AND"):
                self.error("NOT without operand", tok)
            child = self.unary(field)
            return None if child is None else Not(child)
        return self.primary(field)

    def primary(self, field: str):
        tok = self.take()
        if tok.kind == "lparen":
            return self.group(field, tok)
        if tok.kind == "field":
            name = tok.value[:-1].lower()
            if name not in FIELDS:
                self.error(f"unknown field {name!r}", _Tok(tok.kind, tok.value, tok.start, tok.end - 1))
            nxt = self.take()
            if nxt.kind == "lparen":
                return self.group(name, nxt)
            if nxt.kind in ("quoted", "word"):
                return self.leaf(name, nxt)
            self.error(f"field {name!r} needs a term", tok)
        if tok.kind in ("quoted", "word"):
            return self.leaf(field, tok)
        if tok.kind == "rparen":
            self.error("unbalanced parenthesis", tok)
        self.error("expected a term", tok)

    def group(self, field: str, open_tok: _Tok):
        if self.peek().kind == "rparen":
            self.error("empty group", self.peek())
        node = self.or_expr(field)
        close = self.take()
        if close.kind != "rparen":
            raise QueryParseError("unbalanced parenthesis", self.text, (open_tok.start, len(self.text)))
        return node

    def leaf(self, field: str, tok: _Tok):
        if tok.kind == "quoted":
            inner = tok.value[1:-1]
            if field == "author":
                return parse_author_name(inner)
            words = tokenize(inner)
        else:
            words = tokenize(tok.value)
        if not words:
            return None
        if len(words) == 1:
            return Term(field, words[0])
        return Phrase(field, tuple(words))


def parse_query(text: str) -> QueryAst:
    """Parse query text into an AST; raises QueryParseError with the offending span."""
    return _Parser(text).parse()


def parse_author_query(text: str) -> QueryAst:
    """Parse a ``;``-separated list of author names (``Last, F``) into an OR of prefixes."""
    names = [n for n in text.split(";")]
    nodes = []
    pos = 0
    for raw in names:
        node = parse_author_name(raw)
        if node is None:
            raise QueryParseError("empty author name", text, (pos, pos + len(raw)))
        nodes.append(node)
        pos += len(raw) + 1
    return make_or(nodes)

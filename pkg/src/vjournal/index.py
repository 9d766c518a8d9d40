"""Inverted index over title/abstract/authors/categories and query evaluation."""

from __future__ import annotations

import json
import math
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .corpus import BibRecord, Corpus
from .query import (
    TEXT_FIELDS,
    And,
    AuthorPrefix,
    Not,
    Or,
    Phrase,
    QueryAst,
    Term,
    positive_leaves,
)
from .text import tokenize

# Phrase adjacency is only tracked for these fields; elsewhere phrases degrade to AND.
POSITIONAL_FIELDS = ("title", "abstract")


def field_tokens(record: BibRecord) -> dict[str, list[str]]:
    """Token stream of each indexed field, in document order."""
    author_toks: list[str] = []
    for a in record.authors:
        author_toks.extend(tokenize(f"{a.last} {a.first_initials}"))
    cat_toks: list[str] = []
    for c in record.categories:
        cat_toks.extend(tokenize(c))
    return {
        "title": tokenize(record.title),
        "abstract": tokenize(record.abstract),
        "author": author_toks,
        "category": cat_toks,
    }


@dataclass
class IndexSnapshot:
    ids: list[str]
    postings: dict[str, dict[str, np.ndarray]]
    token_doc_freq: dict[str, int]
    sequences: dict[str, list[tuple[str, ...]]]
    authors: list[tuple[tuple[str, str], ...]]
    _empty: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=K.IDX), repr=False)

    @property
    def doc_count(self) -> int:
        return len(self.ids)

    def posting(self, token: str, fld: str) -> list[str]:
        """Posting list of ``token`` in ``fld`` as RecordIds, ascending."""
        arr = self.postings.get(token, {}).get(fld, self._empty)
        return [self.ids[i] for i in arr]

    def _post(self, token: str, fld: str) -> np.ndarray:
        return self.postings.get(token, {}).get(fld, self._empty)

    def all_docs(self) -> np.ndarray:
        return np.arange(self.doc_count, dtype=K.IDX)

    # -- persistence -----------------------------------------------------

    def to_json(self) -> dict:
        return {
            "ids": self.ids,
            "postings": {
                tok: {f: arr.tolist() for f, arr in sorted(by_field.items())}
                for tok, by_field in sorted(self.postings.items())
            },
            "token_doc_freq": dict(sorted(self.token_doc_freq.items())),
            "sequences": {f: [list(s) for s in seqs] for f, seqs in sorted(self.sequences.items())},
            "authors": [[list(a) for a in row] for row in self.authors],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, separators=(",", ":")) + "\n"

    @classmethod
    def from_json(cls, obj: dict) -> IndexSnapshot:
        return cls(
            ids=list(obj["ids"]),
            postings={
                tok: {f: np.asarray(v, dtype=K.IDX) for f, v in by_field.items()}
                for tok, by_field in obj["postings"].items()
            },
            token_doc_freq={k: int(v) for k, v in obj["token_doc_freq"].items()},
            sequences={f: [tuple(s) for s in seqs] for f, seqs in obj["sequences"].items()},
            authors=[tuple((a[0], a[1]) for a in row) for row in obj["authors"]],
        )


def build_index(corpus: Corpus) -> IndexSnapshot:
    ids = list(corpus.ids)
    lists: dict[str, dict[str, list[int]]] = defaultdict(lambda: defaultdict(list))
    df: dict[str, int] = defaultdict(int)
    sequences: dict[str, list[tuple[str, ...]]] = {f: [] for f in POSITIONAL_FIELDS}
    authors = []
    for pos, rid in enumerate(ids):
        rec = corpus.get(rid)
        toks = field_tokens(rec)
        seen: set[str] = set()
        for fld in TEXT_FIELDS:
            for t in dict.fromkeys(toks[fld]):
                lists[t][fld].append(pos)
                seen.add(t)
        for t in seen:
            df[t] += 1
        for fld in POSITIONAL_FIELDS:
            sequences[fld].append(tuple(toks[fld]))
        authors.append(tuple((a.key, a.initials_key) for a in rec.authors))
    postings = {
        t: {f: np.asarray(v, dtype=K.IDX) for f, v in by_field.items()} for t, by_field in lists.items()
    }
    return IndexSnapshot(ids=ids, postings=postings, token_doc_freq=dict(df), sequences=sequences, authors=authors)


def _contains_run(seq: tuple[str, ...], phrase: tuple[str, ...]) -> bool:
    n = len(phrase)
    first = phrase[0]
    for i in range(len(seq) - n + 1):
        if seq[i] == first and seq[i : i + n] == phrase:
            return True
    return False


def match_author(q: AuthorPrefix, record: BibRecord) -> bool:
    """Exact normalised last name; the author's initials must start with the query's."""
    for a in record.authors:
        if a.key == q.last and (not q.first_initials or a.initials_key.startswith(q.first_initials)):
            return True
    return False


class _Evaluator:
    def __init__(self, idx: IndexSnapshot):
        self.idx = idx
        self.cache: dict[QueryAst, np.ndarray] = {}

    def __call__(self, node: QueryAst) -> np.ndarray:
        hit = self.cache.get(node)
        if hit is None:
            hit = self._eval(node)
            self.cache[node] = hit
        return hit

    def _term(self, fld: str, token: str) -> np.ndarray:
        if fld != "any":
            return self.idx._post(token, fld)
        out = self.idx._empty
        for f in TEXT_FIELDS:
            out = K.union(out, self.idx._post(token, f))
        return out

    def _phrase(self, fld: str, tokens: tuple[str, ...]) -> np.ndarray:
        if fld == "any":
            out = self.idx._empty
            for f in TEXT_FIELDS:
                out = K.union(out, self._phrase(f, tokens))
            return out
        cand = self._term(fld, tokens[0])
        for t in tokens[1:]:
            cand = K.intersect(cand, self._term(fld, t))
        if fld not in POSITIONAL_FIELDS or cand.size == 0:
            return cand
        seqs = self.idx.sequences[fld]
        keep = [d for d in cand.tolist() if _contains_run(seqs[d], tokens)]
        return np.asarray(keep, dtype=K.IDX)

    def _author(self, q: AuthorPrefix) -> np.ndarray:
        last_toks = tokenize(q.last)
        if last_toks:
            cand = self._term("author", last_toks[0])
            for t in last_toks[1:]:
                cand = K.intersect(cand, self._term("author", t))
        else:
            cand = self.idx.all_docs()
        keep = []
        for d in cand.tolist():
            for last, initials in self.idx.authors[d]:
                if last == q.last and (not q.first_initials or initials.startswith(q.first_initials)):
                    keep.append(d)
                    break
        return np.asarray(keep, dtype=K.IDX)

    def _eval(self, node: QueryAst) -> np.ndarray:
        if isinstance(node, Term):
            return self._term(node.field, node.token)
        if isinstance(node, Phrase):
            return self._phrase(node.field, node.tokens)
        if isinstance(node, AuthorPrefix):
            return self._author(node)
        if isinstance(node, Not):
            return K.difference(self.idx.all_docs(), self(node.child))
        if isinstance(node, Or):
            out = self.idx._empty
            for c in node.children:
                out = K.union(out, self(c))
            return out
        if isinstance(node, And):
            pos = [c for c in node.children if not isinstance(c, Not)]
            neg = [c.child for c in node.children if isinstance(c, Not)]
            out = self(pos[0]) if pos else self.idx.all_docs()
            for c in pos[1:]:
                out = K.intersect(out, self(c))
            for c in neg:
                if out.size == 0:
                    break
                out = K.difference(out, self(c))
            return out
        raise TypeError(f"not a query node: {node!r}")


def match_positions(q: QueryAst, idx: IndexSnapshot) -> np.ndarray:
    """Sorted index positions of every document matching ``q``."""
    return _Evaluator(idx)(q)


def match_set(q: QueryAst, idx: IndexSnapshot) -> set[str]:
    return {idx.ids[i] for i in match_positions(q, idx)}


def evaluate_query(q: QueryAst, idx: IndexSnapshot) -> list[tuple[str, float]]:
    """Matching ids with scores, sorted by (score desc, id asc).

    Each positive leaf the document matches contributes ln(1 + N / df): a term
    uses its document frequency, a phrase or author name the size of its own
    match set.
    """
    ev = _Evaluator(idx)
    hits = ev(q)
    if hits.size == 0:
        return []
    n = idx.doc_count
    scores = np.zeros(n, dtype=np.float64)
    for leaf in positive_leaves(q):
        docs = ev(leaf)
        if docs.size == 0:
            continue
        df = idx.token_doc_freq.get(leaf.token, 0) if isinstance(leaf, Term) else docs.size
        scores[docs] += math.log(1.0 + n / df)
    out = [(idx.ids[d], float(scores[d])) for d in hits.tolist()]
    out.sort(key=lambda p: (-p[1], p[0]))
    return out

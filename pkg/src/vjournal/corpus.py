"""Canonical record store: ingestion, identity, e-print/journal concordance, persistence."""

from __future__ import annotations

import dataclasses
import datetime as dt
import enum
import json
import logging
import os
import re
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

from .errors import NotFoundError, ValidationError
from .text import normalize_initials, normalize_last, tokenize

log = logging.getLogger(__name__)

RECORD_ID_LEN = 19
_RECORD_ID = re.compile(r"^(\d{4})[A-Za-z0-9.&]{5}[A-Za-z0-9.]{9}[A-Z]$")

THETA_CONC = 0.75
CONC_WEIGHTS = (0.6, 0.3, 0.1)
CONC_DATE_SCALE_DAYS = 730
TIE_EPS = 1e-6


class Kind(str, enum.Enum):
    EPRINT = "Eprint"
    JOURNAL = "Journal"

    @classmethod
    def _missing_(cls, value):
        if isinstance(value, str):
            for k in cls:
                if k.value.lower() == value.strip().lower():
                    return k
        return None


def check_record_id(value: str) -> str:
    if not isinstance(value, str) or len(value) != RECORD_ID_LEN:
        raise ValidationError(f"record id must be {RECORD_ID_LEN} characters: {value!r}")
    m = _RECORD_ID.match(value)
    if not m:
        raise ValidationError(f"malformed record id: {value!r}")
    if not 1900 <= int(m.group(1)) <= 2100:
        raise ValidationError(f"record id year out of range: {value!r}")
    return value


@dataclass(frozen=True, order=True)
class AuthorName:
    last: str
    first_initials: str = ""

    def __post_init__(self):
        if not self.last or not self.last.strip():
            raise ValidationError("author last name is empty")

    @property
    def key(self) -> str:
        return normalize_last(self.last)

    @property
    def initials_key(self) -> str:
        return normalize_initials(self.first_initials)

    def display(self) -> str:
        return f"{self.last}, {self.first_initials}" if self.first_initials else self.last


@dataclass(frozen=True)
class BibRecord:
    id: str
    kind: Kind
    title: str
    abstract: str
    authors: tuple[AuthorName, ...]
    categories: tuple[str, ...]
    date_added: dt.date
    date_published: dt.date
    reference_strings: tuple[str, ...] = ()
    resolved_refs: tuple[str, ...] = ()
    concordance: str | None = None

    # The id doubles as a venue/volume/page locator: YYYY + 5-char source + 4-char
    # volume + 1 qualifier + 4-char page + initial, dots as padding.

    @property
    def venue(self) -> str:
        return self.id[4:9].strip(".")

    @property
    def volume(self) -> int | None:
        v = self.id[9:13].strip(".")
        return int(v) if v.isdigit() else None

    @property
    def page(self) -> str | None:
        p = self.id[14:18].strip(".")
        return p or None

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "kind": self.kind.value,
            "title": self.title,
            "abstract": self.abstract,
            "authors": [{"last": a.last, "first_initials": a.first_initials} for a in self.authors],
            "categories": list(self.categories),
            "date_added": self.date_added.isoformat(),
            "date_published": self.date_published.isoformat(),
            "reference_strings": list(self.reference_strings),
            "resolved_refs": list(self.resolved_refs),
            "concordance": self.concordance,
        }

    @classmethod
    def from_json(cls, obj: dict, as_of: dt.date | None = None) -> BibRecord:
        """Validate one record object. Raises ValidationError naming the first problem."""
        if not isinstance(obj, dict):
            raise ValidationError("record is not a JSON object")
        for key in ("id", "kind", "title", "authors", "date_published"):
            if key not in obj:
                raise ValidationError(f"missing field {key}")
        rid = check_record_id(obj["id"])
        try:
            kind = Kind(obj["kind"])
        except ValueError:
            raise ValidationError(f"invalid kind {obj['kind']!r}") from None
        title = obj["title"]
        if not isinstance(title, str) or not title.strip():
            raise ValidationError("empty title")
        abstract = obj.get("abstract") or ""
        if not isinstance(abstract, str):
            raise ValidationError("abstract is not a string")
        authors_raw = obj["authors"]
        if not isinstance(authors_raw, list) or not authors_raw:
            raise ValidationError("no authors")
        authors = []
        for a in authors_raw:
            if not isinstance(a, dict) or not isinstance(a.get("last"), str):
                raise ValidationError("malformed author")
            authors.append(AuthorName(a["last"].strip(), str(a.get("first_initials") or "").strip()))
        cats = obj.get("categories") or []
        if not isinstance(cats, list) or not all(isinstance(c, str) for c in cats):
            raise ValidationError("categories must be a list of strings")
        published = _parse_date(obj["date_published"], "date_published")
        if obj.get("date_added"):
            added = _parse_date(obj["date_added"], "date_added")
        elif as_of is not None:
            added = as_of
        else:
            raise ValidationError("missing field date_added")
        refs = obj.get("reference_strings") or []
        if not isinstance(refs, list) or not all(isinstance(r, str) for r in refs):
            raise ValidationError("reference_strings must be a list of strings")
        resolved = obj.get("resolved_refs") or []
        concordance = obj.get("concordance")
        return cls(
            id=rid,
            kind=kind,
            title=title,
            abstract=abstract,
            authors=tuple(authors),
            categories=tuple(sorted(set(cats))),
            date_added=added,
            date_published=published,
            reference_strings=tuple(refs),
            resolved_refs=tuple(resolved),
            concordance=concordance,
        )


def _parse_date(value, name: str) -> dt.date:
    try:
        return dt.date.fromisoformat(value)
    except (TypeError, ValueError):
        raise ValidationError(f"invalid {name} {value!r}") from None


@dataclass
class IngestReport:
    added: int = 0
    rejected: list[tuple[int, str]] = field(default_factory=list)


@dataclass
class ConcordanceResult:
    links: list[tuple[str, str, float]] = field(default_factory=list)
    # (eprint_id, tied journal ids, best score) left unlinked for manual review
    ambiguous: list[tuple[str, tuple[str, ...], float]] = field(default_factory=list)


class Corpus:
    """Record store keyed by RecordId.

    Single writer. ``snapshot()`` hands out a frozen copy that readers on other
    threads may keep while the writer continues.
    """

    SNAPSHOT_FILE = "records.jsonl"

    def __init__(self, records: Iterable[BibRecord] = (), *, frozen: bool = False):
        self._records: dict[str, BibRecord] = {}
        self._frozen = False
        for r in records:
            self.add(r)
        self._frozen = frozen
        self._ids: list[str] | None = None
        self._pos: dict[str, int] | None = None

    # -- access ----------------------------------------------------------

    def __len__(self) -> int:
        return len(self._records)

    def __contains__(self, rid: object) -> bool:
        return rid in self._records

    def __iter__(self) -> Iterator[BibRecord]:
        return (self._records[i] for i in self.ids)

    @property
    def frozen(self) -> bool:
        return self._frozen

    @property
    def ids(self) -> list[str]:
        if self._ids is None:
            self._ids = sorted(self._records)
        return self._ids

    def position(self, rid: str) -> int:
        """Index of ``rid`` in the sorted id list."""
        if self._pos is None:
            self._pos = {r: i for i, r in enumerate(self.ids)}
        try:
            return self._pos[rid]
        except KeyError:
            raise NotFoundError(f"unknown record id {rid!r}") from None

    def get(self, rid: str) -> BibRecord:
        try:
            return self._records[rid]
        except KeyError:
            raise NotFoundError(f"unknown record id {rid!r}") from None

    def merged_identity(self, rid: str) -> frozenset[str]:
        rec = self.get(rid)
        if rec.concordance:
            return frozenset((rid, rec.concordance))
        return frozenset((rid,))

    def group_key(self, rid: str) -> str:
        """Representative id of ``rid``'s merged-identity group (its smallest id)."""
        rec = self.get(rid)
        if rec.concordance and rec.concordance < rid:
            return rec.concordance
        return rid

    def groups(self) -> list[tuple[str, ...]]:
        out = []
        for rid in self.ids:
            if self.group_key(rid) == rid:
                out.append(tuple(sorted(self.merged_identity(rid))))
        return out

    # -- mutation --------------------------------------------------------

    def _check_writable(self):
        if self._frozen:
            raise ValidationError("corpus snapshot is read-only")

    def _invalidate(self):
        self._ids = None
        self._pos = None

    def add(self, record: BibRecord) -> None:
        self._check_writable()
        if record.id in self._records:
            raise ValidationError("duplicate id")
        self._records[record.id] = record
        self._invalidate()

    def replace(self, record: BibRecord) -> None:
        self._check_writable()
        self.get(record.id)
        self._records[record.id] = record

    def link(self, eprint_id: str, journal_id: str) -> None:
        e, j = self.get(eprint_id), self.get(journal_id)
        if e.kind == j.kind:
            raise ValidationError("concordance must pair an e-print with a journal paper")
        self.replace(dataclasses.replace(e, concordance=journal_id))
        self.replace(dataclasses.replace(j, concordance=eprint_id))

    def set_resolved(self, rid: str, refs: Iterable[str]) -> None:
        rec = self.get(rid)
        clean = tuple(sorted({r for r in refs if r != rid and r in self._records}))
        self.replace(dataclasses.replace(rec, resolved_refs=clean))

    def snapshot(self) -> Corpus:
        snap = Corpus(frozen=False)
        snap._records = dict(self._records)
        snap._frozen = True
        return snap

    # -- persistence -----------------------------------------------------

    def dumps(self) -> str:
        lines = [json.dumps(r.to_json(), sort_keys=True, ensure_ascii=False) for r in self]
        return "".join(line + "\n" for line in lines)

    def save(self, directory: str | os.PathLike) -> Path:
        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        path = d / self.SNAPSHOT_FILE
        tmp = path.with_suffix(".tmp")
        tmp.write_text(self.dumps(), encoding="utf-8")
        tmp.replace(path)
        return path

    @classmethod
    def load(cls, directory: str | os.PathLike) -> Corpus:
        path = Path(directory) / cls.SNAPSHOT_FILE
        corpus = cls()
        if not path.exists():
            return corpus
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    corpus.add(BibRecord.from_json(json.loads(line)))
        return corpus


def get_record(corpus: Corpus, rid: str) -> BibRecord:
    return corpus.get(rid)


def merged_identity(corpus: Corpus, rid: str) -> frozenset[str]:
    return corpus.merged_identity(rid)


def ingest_records(corpus: Corpus, path: str | os.PathLike, as_of: dt.date) -> IngestReport:
    """Insert every valid record from a JSON-lines file.

    Malformed lines and duplicate ids are rejected individually; an unreadable
    file raises ``OSError``.
    """
    report = IngestReport()
    with open(path, encoding="utf-8") as fh:
        lines = fh.readlines()
    for lineno, line in enumerate(lines, 1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError:
            report.rejected.append((lineno, "malformed json"))
            continue
        try:
            rec = BibRecord.from_json(obj, as_of=as_of)
        except ValidationError as exc:
            report.rejected.append((lineno, str(exc)))
            continue
        # links and resolutions are derived state, never taken from input
        rec = dataclasses.replace(rec, resolved_refs=(), concordance=None)
        if rec.id in corpus:
            report.rejected.append((lineno, "duplicate id"))
            continue
        corpus.add(rec)
        report.added += 1
    return report


# -- concordance -------------------------------------------------------------


def title_similarity(a: BibRecord, b: BibRecord) -> float:
    ta, tb = set(tokenize(a.title)), set(tokenize(b.title))
    if not ta or not tb:
        return 0.0
    return len(ta & tb) / len(ta | tb)


def author_overlap(a: BibRecord, b: BibRecord) -> float:
    la, lb = {x.key for x in a.authors}, {x.key for x in b.authors}
    return len(la & lb) / max(len(a.authors), len(b.authors))


def date_proximity(a: BibRecord, b: BibRecord) -> float:
    days = abs((a.date_published - b.date_published).days)
    return max(0.0, 1.0 - days / CONC_DATE_SCALE_DAYS)


def concordance_score(eprint: BibRecord, journal: BibRecord, weights=CONC_WEIGHTS) -> float:
    wt, wa, wd = weights
    return (
        wt * title_similarity(eprint, journal)
        + wa * author_overlap(eprint, journal)
        + wd * date_proximity(eprint, journal)
    )


def match_concordance(
    corpus: Corpus, threshold: float = THETA_CONC, weights=CONC_WEIGHTS
) -> ConcordanceResult:
    """Link each unlinked e-print to its best journal candidate scoring >= ``threshold``.

    Every journal paper is a candidate, linked or not; an e-print whose best
    candidate is already taken stays unlinked, which keeps repeated runs
    idempotent. Near-ties (within 1e-6) at the top, including two e-prints
    claiming one journal paper with equal scores, link nothing.
    """
    journals = [r for r in corpus if r.kind is Kind.JOURNAL]
    by_token: dict[str, list[str]] = defaultdict(list)
    by_author: dict[str, list[str]] = defaultdict(list)
    for j in journals:
        for t in set(tokenize(j.title)):
            by_token[t].append(j.id)
        for k in {a.key for a in j.authors}:
            by_author[k].append(j.id)

    result = ConcordanceResult()
    claims: dict[str, list[tuple[float, str]]] = defaultdict(list)
    for e in corpus:
        if e.kind is not Kind.EPRINT or e.concordance:
            continue
        cand_ids: set[str] = set()
        for t in set(tokenize(e.title)):
            cand_ids.update(by_token.get(t, ()))
        for k in {a.key for a in e.authors}:
            cand_ids.update(by_author.get(k, ()))
        scored = sorted(
            ((concordance_score(e, corpus.get(j), weights), j) for j in cand_ids),
            key=lambda sj: (-sj[0], sj[1]),
        )
        if not scored or scored[0][0] < threshold:
            continue
        best, best_id = scored[0]
        tied = tuple(j for s, j in scored if best - s <= TIE_EPS)
        if len(tied) > 1:
            result.ambiguous.append((e.id, tied, best))
            continue
        if corpus.get(best_id).concordance:
            log.info("concordance: %s best matches already-linked %s", e.id, best_id)
            continue
        claims[best_id].append((best, e.id))

    for j_id in sorted(claims):
        ranked = sorted(claims[j_id], key=lambda se: (-se[0], se[1]))
        if len(ranked) > 1 and ranked[0][0] - ranked[1][0] <= TIE_EPS:
            tied = tuple(e for s, e in ranked if ranked[0][0] - s <= TIE_EPS)
            for e_id in tied:
                result.ambiguous.append((e_id, (j_id,), ranked[0][0]))
            continue
        score, e_id = ranked[0]
        corpus.link(e_id, j_id)
        result.links.append((e_id, j_id, score))

    result.links.sort(key=lambda t: t[0])
    result.ambiguous.sort(key=lambda t: t[0])
    return result

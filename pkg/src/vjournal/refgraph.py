"""Reference-string parsing, resolution to RecordIds, and the citation graph."""

from __future__ import annotations

import datetime as dt
import json
import re
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .corpus import AuthorName, BibRecord, Corpus
from .errors import ValidationError
from .index import IndexSnapshot
from .text import normalize_last, split_words, tokenize

THETA_REF = 0.6
REF_MARGIN = 0.05
REF_WEIGHTS = (0.4, 0.2, 0.2, 0.2)  # first author, exact year, venue overlap, volume+page

_YEAR = re.compile(r"(?<![0-9])(19[0-9]{2}|20[0-9]{2}|2100)[a-z]?(?![0-9])")
_ET_AL = re.compile(r"\bet\.?\s*al\b\.?", re.IGNORECASE)
_AUTHOR_SPLIT = re.compile(r"[,;&]|\band\b")
_INITIALS = re.compile(r"^(?:[A-Z][a-z]?\.?\s*-?\s*)+$")
_LAST_THEN_INITIALS = re.compile(r"^(.*?\S)\s+((?:[A-Z](?:\.|\b)\s*-?\s*)+)$")
_VOL_PAGE = re.compile(r"^(\d+)\s*[:\s]\s*(\S+)$")
# "ApJ 588:1" or "ApJ 588 1" written without commas, and "ApJ 588" with the page after a comma
_VENUE_VOL_PAGE = re.compile(r"^(.*?[^\d\s])\s+(\d+)\s*[:\s]\s*([A-Za-z]?\d+[A-Za-z]?)$")
_VENUE_VOL = re.compile(r"^(.*?[^\d\s])\s+(\d+)$")
_ARXIV = re.compile(r"^arxiv\s*:\s*(?:[a-z-]+/)?(\d{4})\.?(\d{3,5})$", re.IGNORECASE)


@dataclass(frozen=True)
class ParsedReference:
    raw: str
    authors: tuple[AuthorName, ...] = ()
    et_al: bool = False
    year: int = 0
    venue: tuple[str, ...] = ()
    volume: int | None = None
    page: str | None = None
    trailing_title: str | None = None

    @property
    def valid(self) -> bool:
        """False for the sentinel returned when no year could be found."""
        return self.year != 0

    def to_json(self) -> dict:
        return {
            "authors": [a.display() for a in self.authors],
            "et_al": self.et_al,
            "year": self.year,
            "venue": " ".join(self.venue),
            "volume": self.volume,
            "page": self.page,
            "trailing_title": self.trailing_title,
        }


def _parse_authors(text: str) -> tuple[list[AuthorName], bool]:
    et_al = False
    m = _ET_AL.search(text)
    if m:
        et_al = True
        text = text[: m.start()]
    out: list[list[str]] = []
    for piece in _AUTHOR_SPLIT.split(text):
        piece = piece.strip()
        if not piece:
            continue
        if _INITIALS.match(piece) and out and not out[-1][1]:
            out[-1][1] = piece
            continue
        m2 = _LAST_THEN_INITIALS.match(piece)
        if m2:
            out.append([m2.group(1).strip(), m2.group(2).strip()])
        else:
            out.append([piece, ""])
    authors = [AuthorName(last, initials) for last, initials in out if normalize_last(last)]
    return authors, et_al


def parse_reference(raw: str) -> ParsedReference:
    """Parse ``<authors> <year>, <venue>, <volume>, <page>`` tolerantly.

    Never raises. Without a recognisable year the whole string becomes the
    trailing title and ``year`` is 0.
    """
    s = " ".join(raw.split())
    if not s:
        return ParsedReference(raw=raw)
    m = _YEAR.search(s)
    if not m:
        return ParsedReference(raw=raw, trailing_title=s)
    authors, et_al = _parse_authors(s[: m.start()].strip(" ,;:"))
    pieces = [p.strip() for p in s[m.end() :].split(",")]
    pieces = [p.strip(" .;:()") for p in pieces]
    pieces = [p for p in pieces if p]
    venue: tuple[str, ...] = ()
    volume = page = None
    rest: list[str] = []
    if pieces and _ARXIV.match(pieces[0]):
        am = _ARXIV.match(pieces[0])
        venue, volume, page = ("arxiv",), int(am.group(1)), am.group(2)
        rest = pieces[1:]
    elif pieces:
        head, tail = pieces[0], pieces[1:]
        vm = _VENUE_VOL_PAGE.match(head)
        if vm:
            head, volume, page = vm.group(1), int(vm.group(2)), vm.group(3)
        elif (vm := _VENUE_VOL.match(head)) and tail and not tail[0].isalpha():
            head, volume = vm.group(1), int(vm.group(2))
            page = tail[0].removeprefix("p").strip(". ")
            tail = tail[1:]
        venue = tuple(split_words(head))
        if volume is None and tail and tail[0].isdigit():
            volume = int(tail[0])
            tail = tail[1:]
            if tail:
                page = tail[0].removeprefix("p").strip(". ")
                tail = tail[1:]
        elif volume is None and tail and _VOL_PAGE.match(tail[0]):
            vm = _VOL_PAGE.match(tail[0])
            volume, page = int(vm.group(1)), vm.group(2)
            tail = tail[1:]
        rest = tail
    trailing = ", ".join(rest) or None
    if not authors and not trailing and venue:
        # a bare "<year>, <text>" reference: the text is more likely a title than a venue
        trailing = pieces[0]
    return ParsedReference(
        raw=raw,
        authors=tuple(authors),
        et_al=et_al,
        year=int(m.group(1)),
        venue=venue,
        volume=volume,
        page=page or None,
        trailing_title=trailing,
    )


# -- resolution --------------------------------------------------------------


@dataclass(frozen=True)
class Resolution:
    record_id: str | None
    score: float
    runner_up: float = 0.0


def _jaccard(a: set, b: set) -> float:
    if not a or not b:
        return 0.0
    return len(a & b) / len(a | b)


def _initials_compatible(a: str, b: str) -> bool:
    return not a or not b or a.startswith(b) or b.startswith(a)


class Resolver:
    """Resolves parsed references against a fixed corpus snapshot.

    Candidates whose volume/page contradict the reference are dropped before
    scoring unless ``veto_conflicts`` is off; a reference to an absent paper by
    a prolific author otherwise clears the threshold on author and year alone.
    """

    def __init__(
        self,
        corpus: Corpus,
        idx: IndexSnapshot | None = None,
        threshold: float = THETA_REF,
        margin: float = REF_MARGIN,
        weights=REF_WEIGHTS,
        veto_conflicts: bool = True,
    ):
        self.corpus = corpus
        self.veto_conflicts = veto_conflicts
        self.idx = idx
        self.threshold = threshold
        self.margin = margin
        self.weights = weights
        self._by_first: dict[str, list[str]] = defaultdict(list)
        self._by_title: dict[str, list[str]] = defaultdict(list)
        for rec in corpus:
            self._by_first[rec.authors[0].key].append(rec.id)
            if idx is None:
                for t in set(tokenize(rec.title)):
                    self._by_title[t].append(rec.id)

    def _title_candidates(self, tokens: set[str]) -> set[str]:
        out: set[str] = set()
        for t in tokens:
            if self.idx is not None:
                out.update(self.idx.posting(t, "title"))
            else:
                out.update(self._by_title.get(t, ()))
        return out

    def candidates(self, pr: ParsedReference) -> list[BibRecord]:
        if not pr.valid:
            return []
        years = {pr.year - 1, pr.year, pr.year + 1}
        if pr.authors:
            ids: Iterable[str] = self._by_first.get(pr.authors[0].key, ())
        elif pr.trailing_title:
            ids = self._title_candidates(set(tokenize(pr.trailing_title)))
        else:
            return []
        recs = (self.corpus.get(i) for i in ids)
        return sorted((r for r in recs if r.date_published.year in years), key=lambda r: r.id)

    def score(self, pr: ParsedReference, rec: BibRecord) -> float:
        w_auth, w_year, w_venue, w_vp = self.weights
        if pr.authors:
            first, theirs = pr.authors[0], rec.authors[0]
            if first.key != theirs.key:
                lead = 0.0
            elif _initials_compatible(first.initials_key, theirs.initials_key):
                lead = 1.0
            else:
                lead = 0.5
        else:
            lead = _jaccard(set(tokenize(pr.trailing_title or "")), set(tokenize(rec.title)))
        year = 1.0 if rec.date_published.year == pr.year else 0.0
        venue = _jaccard(set(pr.venue), set(split_words(rec.venue)))
        vp = 0.0
        if pr.volume is not None and pr.page and rec.volume is not None and rec.page:
            vp = 1.0 if pr.volume == rec.volume and _page_key(pr.page) == _page_key(rec.page) else 0.0
        return w_auth * lead + w_year * year + w_venue * venue + w_vp * vp

    def contradicts(self, pr: ParsedReference, rec: BibRecord) -> bool:
        """Both sides carry a volume and page, and they differ."""
        if pr.volume is None or not pr.page or rec.volume is None or not rec.page:
            return False
        return pr.volume != rec.volume or _page_key(pr.page) != _page_key(rec.page)

    def resolve(self, pr: ParsedReference, exclude: Iterable[str] = ()) -> Resolution:
        skip = set(exclude)
        pool = [r for r in self.candidates(pr) if r.id not in skip]
        if self.veto_conflicts:
            pool = [r for r in pool if not self.contradicts(pr, r)]
        scored = sorted(
            ((self.score(pr, r), r.id) for r in pool),
            key=lambda s: (-s[0], s[1]),
        )
        if not scored:
            return Resolution(None, 0.0)
        best, best_id = scored[0]
        runner = scored[1][0] if len(scored) > 1 else 0.0
        if best < self.threshold or (len(scored) > 1 and best - runner < self.margin - 1e-12):
            return Resolution(None, best, runner)
        return Resolution(best_id, best, runner)


def _page_key(page: str) -> str:
    return re.sub(r"[^0-9A-Za-z]", "", page).upper().lstrip("0")


def resolve_reference(pr: ParsedReference, corpus: Corpus, idx: IndexSnapshot | None = None) -> str | None:
    """One-off resolution; build a :class:`Resolver` when resolving many references."""
    return Resolver(corpus, idx).resolve(pr).record_id


@dataclass
class AuditRow:
    citing: str
    raw: str
    parsed: ParsedReference
    resolution: Resolution

    def to_line(self) -> str:
        return json.dumps(
            {
                "citing": self.citing,
                "raw": self.raw,
                "parsed": self.parsed.to_json(),
                "resolved": self.resolution.record_id or "NONE",
                "score": round(self.resolution.score, 6),
            },
            sort_keys=True,
            ensure_ascii=False,
        )


def resolve_corpus(corpus: Corpus, resolver: Resolver) -> list[AuditRow]:
    """Resolve every reference string in ``corpus`` and store the results on the records.

    References that resolve into the citing record's own merged-identity group
    are dropped.
    """
    rows: list[AuditRow] = []
    for rid in list(corpus.ids):
        rec = corpus.get(rid)
        own = corpus.merged_identity(rid)
        found = []
        for raw in rec.reference_strings:
            pr = parse_reference(raw)
            res = resolver.resolve(pr, exclude=own)
            rows.append(AuditRow(rid, raw, pr, res))
            if res.record_id is not None:
                found.append(res.record_id)
        corpus.set_resolved(rid, found)
    return rows


# -- graph -------------------------------------------------------------------


@dataclass
class CitationGraph:
    # citing group -> sorted cited groups; groups are named by their smallest member id
    edges: dict[str, tuple[str, ...]] = field(default_factory=dict)
    # citing record -> sorted cited groups, kept for windowed counting by citing date
    record_edges: dict[str, tuple[str, ...]] = field(default_factory=dict)
    in_counts: dict[str, int] = field(default_factory=dict)
    group_of: dict[str, str] = field(default_factory=dict)

    def citation_count(self, rid: str) -> int:
        return self.in_counts.get(self.group_of.get(rid, rid), 0)

    def dumps(self) -> str:
        obj = {
            "edges": {k: list(v) for k, v in sorted(self.edges.items())},
            "record_edges": {k: list(v) for k, v in sorted(self.record_edges.items())},
            "in_counts": dict(sorted(self.in_counts.items())),
            "group_of": dict(sorted(self.group_of.items())),
        }
        return json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n"

    @classmethod
    def loads(cls, text: str) -> CitationGraph:
        obj = json.loads(text)
        return cls(
            edges={k: tuple(v) for k, v in obj["edges"].items()},
            record_edges={k: tuple(v) for k, v in obj["record_edges"].items()},
            in_counts={k: int(v) for k, v in obj["in_counts"].items()},
            group_of=dict(obj["group_of"]),
        )


def build_citation_graph(corpus: Corpus, resolved: Mapping[str, Iterable[str]] | None = None) -> CitationGraph:
    """Collapse resolved references through merged identity into a group-level graph.

    ``resolved`` maps citing id to cited ids; by default each record's own
    ``resolved_refs`` are used.
    """
    g = CitationGraph()
    for rid in corpus.ids:
        g.group_of[rid] = corpus.group_key(rid)
    group_edges: dict[str, set[str]] = defaultdict(set)
    for rid in corpus.ids:
        cited = resolved.get(rid, ()) if resolved is not None else corpus.get(rid).resolved_refs
        mine = g.group_of[rid]
        targets = {g.group_of[c] for c in cited if c in g.group_of} - {mine}
        if targets:
            g.record_edges[rid] = tuple(sorted(targets))
            group_edges[mine] |= targets
    g.edges = {k: tuple(sorted(v)) for k, v in sorted(group_edges.items())}
    counts: dict[str, int] = defaultdict(int)
    for targets in g.edges.values():
        for t in targets:
            counts[t] += 1
    g.in_counts = dict(sorted(counts.items()))
    return g


def count_citations(g: CitationGraph, citing_ids: Iterable[str]) -> dict[str, int]:
    """Distinct citing groups (among ``citing_ids``) per cited group."""
    per_group: dict[str, set[str]] = defaultdict(set)
    for rid in citing_ids:
        edges = g.record_edges.get(rid)
        if edges:
            per_group[g.group_of[rid]].update(edges)
    counts: dict[str, int] = defaultdict(int)
    for targets in per_group.values():
        for t in targets:
            counts[t] += 1
    return counts


def rank_counts(counts: Mapping[str, int]) -> list[tuple[str, int]]:
    return sorted(((k, v) for k, v in counts.items() if v > 0), key=lambda kv: (-kv[1], kv[0]))


def citations_in_window(
    g: CitationGraph,
    corpus: Corpus,
    cited_filter: Iterable[str] | None,
    citing_window: tuple[dt.date, dt.date],
) -> list[tuple[str, int]]:
    """Citation counts from records added within the inclusive window, sorted (count desc, id asc).

    ``cited_filter=None`` keeps every cited group; otherwise only groups with a
    member in the filter are reported.
    """
    start, end = citing_window
    if start > end:
        raise ValidationError(f"invalid window: {start} > {end}")
    citing = [r.id for r in corpus if start <= r.date_added <= end]
    counts = count_citations(g, citing)
    if cited_filter is not None:
        keep = {g.group_of.get(c, c) for c in cited_filter}
        counts = {k: v for k, v in counts.items() if k in keep}
    return rank_counts(counts)

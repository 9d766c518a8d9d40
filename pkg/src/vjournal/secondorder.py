"""Operators on query result lists: recent, most popular, most cited."""

from __future__ import annotations

import datetime as dt
import enum
from collections import defaultdict
from dataclasses import dataclass

from .corpus import Corpus, Kind
from .errors import ValidationError
from .index import IndexSnapshot, evaluate_query, match_positions
from .query import QueryAst
from .readstats import CoReadStats
from .refgraph import CitationGraph, count_citations

LIST_CAP = 10
SEED_SIZE = 100
CITED_WINDOW_DAYS = 91
SEED_ORDERS = ("reads", "recency")


class ListKind(str, enum.Enum):
    RECENT = "Recent"
    MOST_POPULAR = "MostPopular"
    MOST_CITED = "MostCited"


@dataclass(frozen=True)
class RankedList:
    kind: ListKind
    entries: tuple[tuple[str, float], ...]
    generated_at: dt.date | None
    window: tuple[dt.date, dt.date] | None = None

    @property
    def ids(self) -> list[str]:
        return [rid for rid, _ in self.entries]

    def to_json(self) -> dict:
        return {
            "kind": self.kind.value,
            "entries": [[rid, score] for rid, score in self.entries],
            "generated_at": self.generated_at.isoformat() if self.generated_at else None,
            "window": [d.isoformat() for d in self.window] if self.window else None,
        }


def recent(
    q: QueryAst, corpus: Corpus, idx: IndexSnapshot, since: dt.date, now: dt.date, list_cap: int = LIST_CAP
) -> RankedList:
    """Matching e-prints with ``since < date_added <= now``, newest first."""
    if since > now:
        raise ValidationError(f"since {since} is after now {now}")
    rows = []
    for rid, score in evaluate_query(q, idx):
        rec = corpus.get(rid)
        if rec.kind is Kind.EPRINT and since < rec.date_added <= now:
            rows.append((rec.date_added, score, rid))
    rows.sort(key=lambda r: (-r[0].toordinal(), -r[1], r[2]))
    entries = tuple((rid, score) for _, score, rid in rows[:list_cap])
    return RankedList(ListKind.RECENT, entries, now, (since, now))


def _matching_groups(q: QueryAst, corpus: Corpus, idx: IndexSnapshot) -> dict[str, dt.date]:
    """Groups with a member matching ``q``, mapped to their latest matching date_added."""
    latest: dict[str, dt.date] = {}
    for pos in match_positions(q, idx).tolist():
        rid = idx.ids[pos]
        g = corpus.group_key(rid)
        added = corpus.get(rid).date_added
        if g not in latest or added > latest[g]:
            latest[g] = added
    return latest


def popularity_seeds(
    q: QueryAst, corpus: Corpus, idx: IndexSnapshot, stats: CoReadStats, seed_size: int = SEED_SIZE, seed_order: str = "reads"
) -> list[str]:
    latest = _matching_groups(q, corpus, idx)
    if seed_order == "reads":
        key = lambda g: (-stats.reads(g), -latest[g].toordinal(), g)  # noqa: E731
    elif seed_order == "recency":
        key = lambda g: (-latest[g].toordinal(), g)  # noqa: E731
    else:
        raise ValidationError(f"unknown seed ordering {seed_order!r}")
    return sorted(latest, key=key)[:seed_size]


def most_popular(
    q: QueryAst,
    corpus: Corpus,
    idx: IndexSnapshot,
    stats: CoReadStats,
    now: dt.date | None = None,
    list_cap: int = LIST_CAP,
    seed_size: int = SEED_SIZE,
    seed_order: str = "reads",
) -> RankedList:
    """Works most co-read with the top ``seed_size`` matching works.

    Each seed adds its pair count to every group co-read with it; the seeds
    themselves are removed. Recommended works need not match the query.
    """
    seeds = popularity_seeds(q, corpus, idx, stats, seed_size, seed_order)
    score: dict[str, int] = defaultdict(int)
    for s in seeds:
        for other, c in stats.neighbors(s).items():
            score[other] += c
    for s in seeds:
        score.pop(s, None)
    ranked = sorted(((g, c) for g, c in score.items() if c > 0), key=lambda kv: (-kv[1], kv[0]))
    entries = tuple((g, c) for g, c in ranked[:list_cap])
    return RankedList(ListKind.MOST_POPULAR, entries, now)


def most_cited(
    q: QueryAst,
    corpus: Corpus,
    idx: IndexSnapshot,
    g: CitationGraph,
    now: dt.date,
    list_cap: int = LIST_CAP,
    window_days: int = CITED_WINDOW_DAYS,
) -> RankedList:
    """Works most cited by matching records added in ``(now - window_days, now]``."""
    start = now - dt.timedelta(days=window_days)
    citing = []
    for pos in match_positions(q, idx).tolist():
        rid = idx.ids[pos]
        if start < corpus.get(rid).date_added <= now:
            citing.append(rid)
    counts = count_citations(g, citing)
    ranked = sorted(((k, v) for k, v in counts.items() if v > 0), key=lambda kv: (-kv[1], kv[0]))
    entries = tuple((k, v) for k, v in ranked[:list_cap])
    return RankedList(ListKind.MOST_CITED, entries, now, (start, now))

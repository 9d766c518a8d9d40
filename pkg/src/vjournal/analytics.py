"""E-print share among top-cited works, and cites/reads per work split by e-print status."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass

from .corpus import Corpus, Kind
from .errors import ValidationError
from .readstats import CoReadStats
from .refgraph import CitationGraph


@dataclass
class ConcordanceStats:
    n_top: int | None = None
    fraction_eprinted: float | None = None
    # None marks an empty partition, which is different from a zero mean
    mean_cites_eprinted: float | None = None
    mean_cites_not: float | None = None
    mean_reads_eprinted: float | None = None
    mean_reads_not: float | None = None

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"


@dataclass(frozen=True)
class GroupRow:
    group: str
    cites: int
    reads: int
    eprinted: bool


def group_rows(corpus: Corpus, g: CitationGraph, stats: CoReadStats | None = None) -> list[GroupRow]:
    rows = []
    for members in corpus.groups():
        key = members[0]
        eprinted = any(corpus.get(m).kind is Kind.EPRINT for m in members)
        reads = stats.read_counts.get(key, 0) if stats is not None else 0
        rows.append(GroupRow(key, g.in_counts.get(key, 0), reads, eprinted))
    return rows


def eprint_fraction_top_cited(corpus: Corpus, g: CitationGraph, n: int) -> ConcordanceStats:
    """Share of the ``n`` most cited works (ties by id) that have an e-print version."""
    if n < 1:
        raise ValidationError("n must be >= 1")
    rows = group_rows(corpus, g)
    if len(rows) < n:
        raise ValidationError(f"corpus has {len(rows)} works, fewer than n={n}")
    top = sorted(rows, key=lambda r: (-r.cites, r.group))[:n]
    return ConcordanceStats(n_top=n, fraction_eprinted=sum(r.eprinted for r in top) / n)


def _mean(values: list[int]) -> float | None:
    return math.fsum(values) / len(values) if values else None


def reads_cites_by_eprint_status(corpus: Corpus, g: CitationGraph, stats: CoReadStats) -> ConcordanceStats:
    rows = group_rows(corpus, g, stats)
    yes = [r for r in rows if r.eprinted]
    no = [r for r in rows if not r.eprinted]
    return ConcordanceStats(
        mean_cites_eprinted=_mean([r.cites for r in yes]),
        mean_cites_not=_mean([r.cites for r in no]),
        mean_reads_eprinted=_mean([r.reads for r in yes]),
        mean_reads_not=_mean([r.reads for r in no]),
    )


def rows_csv(rows: list[GroupRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["group", "cites", "reads", "eprinted"])
    for r in rows:
        w.writerow([r.group, r.cites, r.reads, int(r.eprinted)])
    return buf.getvalue()

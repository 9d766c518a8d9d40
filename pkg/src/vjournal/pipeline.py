"""Derived snapshots (links, index, citation graph, co-reads) built from a stored corpus."""

from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass
from pathlib import Path

from .config import Settings
from .corpus import ConcordanceResult, Corpus, match_concordance
from .index import IndexSnapshot, build_index
from .readstats import CoReadStats, ReadLog, compute_coread
from .refgraph import AuditRow, CitationGraph, Resolver, build_citation_graph, resolve_corpus

log = logging.getLogger(__name__)

INDEX_FILE = "index.json"
GRAPH_FILE = "graph.json"
COREAD_FILE = "coread.json"
REVIEW_FILE = "concordance_review.json"


@dataclass
class Snapshots:
    """Consistent, read-only views built from one corpus state."""

    corpus: Corpus
    idx: IndexSnapshot
    graph: CitationGraph
    coread: CoReadStats


@dataclass
class BuildResult:
    snapshots: Snapshots
    concordance: ConcordanceResult
    audit: list[AuditRow]


def build(corpus: Corpus, reads: ReadLog, settings: Settings = Settings()) -> BuildResult:
    """Link concordant pairs, index, resolve references, and aggregate the graph and co-reads.

    Mutates ``corpus`` (links and resolved references) and returns frozen snapshots.
    """
    conc = match_concordance(corpus, threshold=settings.theta_conc)
    for e_id, tied, score in conc.ambiguous:
        log.warning("ambiguous concordance for %s: %s (score %.6f)", e_id, ", ".join(tied), score)
    idx = build_index(corpus)
    resolver = Resolver(corpus, idx, threshold=settings.theta_ref, margin=settings.ref_margin)
    audit = resolve_corpus(corpus, resolver)
    snap = corpus.snapshot()
    graph = build_citation_graph(snap)
    coread = compute_coread(reads.events, snap, s_max=settings.s_max)
    return BuildResult(Snapshots(snap, idx, graph, coread), conc, audit)


def save_snapshots(result: BuildResult, directory: str | os.PathLike) -> list[Path]:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    snaps = result.snapshots
    written = [snaps.corpus.save(d)]
    for name, text in (
        (INDEX_FILE, snaps.idx.dumps()),
        (GRAPH_FILE, snaps.graph.dumps()),
        (COREAD_FILE, snaps.coread.dumps()),
    ):
        path = d / name
        path.write_text(text, encoding="utf-8")
        written.append(path)
    review = [{"eprint": e, "journals": list(j), "score": round(s, 6)} for e, j, s in result.concordance.ambiguous]
    path = d / REVIEW_FILE
    path.write_text(json.dumps(review, indent=1, sort_keys=True) + "\n", encoding="utf-8")
    written.append(path)
    return written


def load_snapshots(directory: str | os.PathLike) -> Snapshots:
    """Load what ``save_snapshots`` wrote; raises FileNotFoundError if the build never ran."""
    d = Path(directory)
    for name in (INDEX_FILE, GRAPH_FILE, COREAD_FILE):
        if not (d / name).exists():
            raise FileNotFoundError(f"{d / name} missing; run the build step first")
    corpus = Corpus.load(d).snapshot()
    idx = IndexSnapshot.from_json(json.loads((d / INDEX_FILE).read_text(encoding="utf-8")))
    graph = CitationGraph.loads((d / GRAPH_FILE).read_text(encoding="utf-8"))
    coread = CoReadStats.loads((d / COREAD_FILE).read_text(encoding="utf-8"))
    return Snapshots(corpus, idx, graph, coread)

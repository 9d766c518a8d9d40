from __future__ import annotations

import dataclasses
import datetime as dt
import random

import pytest

from helpers import eid, jid, rec, top_cited_fixture
from vjournal.analytics import eprint_fraction_top_cited, group_rows, reads_cites_by_eprint_status, rows_csv
from vjournal.corpus import Corpus
from vjournal.errors import ValidationError
from vjournal.readstats import ReadEvent, compute_coread
from vjournal.refgraph import CitationGraph, build_citation_graph

T = dt.datetime(2005, 6, 1, tzinfo=dt.timezone.utc)


def _frac(c, n):
    return eprint_fraction_top_cited(c, build_citation_graph(c), n).fraction_eprinted


def test_saturated_nine_of_ten_and_none():
    assert _frac(top_cited_fixture(20, set(range(10, 20))), 10) == 1.0
    assert _frac(top_cited_fixture(20, set(range(11, 20)) | {3}), 10) == 0.9
    assert _frac(top_cited_fixture(20, set()), 10) == 0.0


def test_invalid_n():
    c = top_cited_fixture(3, set())
    with pytest.raises(ValidationError):
        eprint_fraction_top_cited(c, build_citation_graph(c), 0)
    with pytest.raises(ValidationError):
        eprint_fraction_top_cited(c, build_citation_graph(c), 10**6)


def _relabel(c: Corpus, seed: int) -> Corpus:
    """Same graph and kinds under a random bijection of ids."""
    rng = random.Random(seed)
    ids = c.ids
    nums = rng.sample(range(1, 9000), len(ids))
    new = {rid: (eid(n) if c.get(rid).kind.value == "Eprint" else jid(n)) for rid, n in zip(ids, nums)}
    records = [
        dataclasses.replace(
            r,
            id=new[r.id],
            resolved_refs=tuple(new[x] for x in r.resolved_refs),
            concordance=new[r.concordance] if r.concordance else None,
        )
        for r in c
    ]
    return Corpus(records)


def test_fraction_invariant_under_relabeling():
    base = top_cited_fixture(15, {1, 4, 9, 12, 14})
    for seed in range(5):
        other = _relabel(base, seed)
        for n in (1, 5, 10, 15):
            assert _frac(other, n) == _frac(base, n)


def test_means_arithmetic_example():
    # counts supplied directly: three works cannot cite each other four times
    w1, w2, w3, e1, e2 = jid(1), jid(2), jid(3), eid(1), eid(2)
    c = Corpus([rec(w1), rec(w2), rec(w3), rec(e1), rec(e2)])
    c.link(e1, w1)
    c.link(e2, w2)
    g = CitationGraph(in_counts={min(e1, w1): 4, min(e2, w2): 2, w3: 3}, group_of={r: c.group_key(r) for r in c.ids})
    reads = [ReadEvent(f"s{i}", r, T) for i, r in enumerate([w1, e1, w3, w3, w2, w1])]
    stats = reads_cites_by_eprint_status(c, g, compute_coread(reads, c))
    assert (stats.mean_cites_eprinted, stats.mean_cites_not) == (3.0, 3.0)
    assert (stats.mean_reads_eprinted, stats.mean_reads_not) == (2.0, 2.0)
    assert eprint_fraction_top_cited(c, g, 1).fraction_eprinted == 1.0
    assert eprint_fraction_top_cited(c, g, 2).fraction_eprinted == 0.5


def test_empty_partition_is_absent():
    c = Corpus([rec(eid(1)), rec(eid(2))])
    stats = reads_cites_by_eprint_status(c, build_citation_graph(c), compute_coread([], c))
    assert stats.mean_cites_not is None and stats.mean_reads_not is None
    assert stats.mean_cites_eprinted == 0.0


def test_rows_csv():
    c = top_cited_fixture(2, {1})
    text = rows_csv(group_rows(c, build_citation_graph(c)))
    assert text.splitlines()[0] == "group,cites,reads,eprinted"
    assert len(text.splitlines()) == 1 + len(Corpus.groups(c))

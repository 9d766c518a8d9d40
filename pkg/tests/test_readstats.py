from __future__ import annotations

import datetime as dt
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import eid, jid, oracle_coread, random_events, rec
from vjournal.corpus import Corpus
from vjournal.errors import NotFoundError
from vjournal.readstats import CoReadStats, ReadEvent, ReadLog, also_read_neighbors, compute_coread, ingest_reads, parse_timestamp

T = dt.datetime(2005, 6, 1, tzinfo=dt.timezone.utc)
X, Y, Z = jid(1), jid(2), jid(3)


def ev(session, record, minute=0):
    return ReadEvent(session, record, T + dt.timedelta(minutes=minute))


def s123():
    return [ev("s1", X), ev("s1", Y), ev("s2", X), ev("s2", Y), ev("s3", X), ev("s3", Z)]


def test_timestamp_parsing():
    assert parse_timestamp("2005-06-01T00:00:00Z") == T
    assert parse_timestamp("2005-06-01T02:00:00+02:00") == T
    assert parse_timestamp("2005-06-01 00:00:00") == T


def test_ingest_reads(tmp_path):
    c = Corpus([rec(X), rec(Y)])
    p = tmp_path / "reads.csv"
    p.write_text(
        "session_id,record_id,timestamp\n"
        f"s1,{X},2005-06-01T00:00:00Z\n"
        f"s1,{Y},2005-06-01T00:01:00Z\n"
        f"s2,{X},2005-06-01T00:02:00Z\n"
        f"s2,{X},2005-06-01T00:03:00Z\n"
        f"s3,{Z},2005-06-01T00:04:00Z\n"
        "garbage\n"
        f"s4,{X},yesterday\n",
        encoding="utf-8",
    )
    log = ReadLog()
    report = ingest_reads(log, p, c)
    assert report.added == 3
    assert [n for n, _ in report.rejected] == [6, 7, 8]
    assert "unknown record id" in report.rejected[0][1]
    assert compute_coread(log.events, c).read_counts == {X: 2, Y: 1}


def test_ingest_unreadable_file(tmp_path):
    with pytest.raises(OSError):
        ingest_reads(ReadLog(), tmp_path / "none.csv", Corpus())


def test_read_log_round_trip(tmp_path):
    log = ReadLog(s123())
    log.save(tmp_path)
    assert ReadLog.load(tmp_path).dumps() == log.dumps()


def test_coread_fixture():
    stats = compute_coread(s123())
    assert stats.pair(X, Y) == 2 and stats.pair(X, Z) == 1 and stats.pair(Y, Z) == 0
    assert stats.read_counts == {X: 3, Y: 2, Z: 1}
    assert also_read_neighbors(X, stats, 2) == [(Y, 2), (Z, 1)]
    assert also_read_neighbors(X, stats, 0) == []
    assert also_read_neighbors(jid(9), stats, 3) == []


def test_single_read_has_no_pairs():
    stats = compute_coread([ev("s1", X)])
    assert stats.pair_counts == {} and stats.read_counts == {X: 1}


def test_robot_session_contributes_nothing():
    ids = [jid(i) for i in range(1, 202)]
    robot = [ev("bot", r, i) for i, r in enumerate(ids)]
    stats = compute_coread(robot + [ev("s1", X), ev("s1", Y)])
    assert stats.read_counts == {X: 1, Y: 1}
    assert stats.pair_counts == {(X, Y): 1}
    at_limit = compute_coread(robot[:200])
    assert len(at_limit.read_counts) == 200


def test_repeat_reads_count_once():
    stats = compute_coread([ev("s1", X, 0), ev("s1", X, 5), ev("s1", Y, 6), ev("s1", Y, 9)])
    assert stats.read_counts == {X: 1, Y: 1} and stats.pair(X, Y) == 1


def test_twin_reads_pool_into_one_group():
    e, j = eid(1), jid(1)
    c = Corpus([rec(e), rec(j), rec(Y)])
    c.link(e, j)
    stats = compute_coread([ev("s1", e), ev("s1", j), ev("s1", Y), ev("s2", j)], c)
    g = min(e, j)
    assert stats.read_counts == {g: 2, Y: 1}
    assert stats.pair(e, Y) == stats.pair(j, Y) == 1
    assert also_read_neighbors(j, stats, 5) == [(Y, 1)]


def test_unknown_id_with_corpus_is_not_found():
    c = Corpus([rec(X)])
    with pytest.raises(NotFoundError):
        also_read_neighbors(Y, compute_coread([], c), 3)


def test_stats_round_trip():
    stats = compute_coread(s123())
    assert CoReadStats.loads(stats.dumps()).dumps() == stats.dumps()


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(0, 500), st.integers(1, 60))
def test_matches_quadratic_oracle(seed, n_events, n_sessions):
    rng = random.Random(seed)
    ids = [jid(i) for i in range(1, rng.randint(2, 100))]
    events = random_events(rng, ids, n_events, n_sessions)
    s_max = rng.choice([3, 10, 200])
    stats = compute_coread(events, s_max=s_max)
    pairs, reads = oracle_coread(events, s_max=s_max)
    assert stats.pair_counts == pairs
    assert stats.read_counts == reads
    for (a, b), cnt in stats.pair_counts.items():
        assert a < b
        assert stats.pair(a, b) == stats.pair(b, a) == cnt
        assert cnt <= min(stats.read_counts[a], stats.read_counts[b])
        assert dict(also_read_neighbors(a, stats, 10**6))[b] == dict(also_read_neighbors(b, stats, 10**6))[a]

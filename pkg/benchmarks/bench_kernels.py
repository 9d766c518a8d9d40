"""Compare the numba and pure-numpy kernel backends.

Each backend runs in its own interpreter because the backend is chosen at
import time from ``VJOURNAL_PURE_NUMPY``. Timings cover the two hot paths:
boolean query evaluation (posting-list merges) and co-read pair counting.

    python benchmarks/bench_kernels.py --records 20000 --sessions 20000
"""

from __future__ import annotations

import argparse
import json
import os
import random
import statistics
import subprocess
import sys
import time


def _worker(args) -> dict:
    import datetime as dt

    import numpy as np

    from vjournal import _kernels as K
    from vjournal.corpus import AuthorName, BibRecord, Corpus, Kind
    from vjournal.index import build_index, match_positions
    from vjournal.query import parse_query

    rng = random.Random(args.seed)
    vocab = [f"w{i}" for i in range(400)]
    day = dt.date(2005, 1, 1)
    records = [
        BibRecord(
            id=f"2005ApJ..{i // 10000:4d}.{i % 10000:4d}K".replace(" ", "."),
            kind=Kind.JOURNAL,
            title=" ".join(rng.choices(vocab[:60], k=8)),
            abstract=" ".join(rng.choices(vocab, k=40)),
            authors=(AuthorName("Smith", "J"),),
            categories=("astro-ph",),
            date_added=day,
            date_published=day,
        )
        for i in range(args.records)
    ]
    idx = build_index(Corpus(records))
    queries = [
        parse_query(f"({rng.choice(vocab[:60])} OR {rng.choice(vocab)}) {rng.choice(vocab)} NOT {rng.choice(vocab)}")
        for _ in range(args.queries)
    ]

    # warm up so numba compilation (or its cache load) is not timed
    match_positions(queries[0], idx)
    K.count_pairs(np.array([0, 2], dtype=np.int64), np.array([0, 1], dtype=np.int32), 2)

    def timed(fn):
        runs = []
        for _ in range(args.repeat):
            t0 = time.perf_counter()
            fn()
            runs.append(time.perf_counter() - t0)
        return statistics.median(runs)

    q_time = timed(lambda: [match_positions(q, idx) for q in queries])

    lengths = [min(args.records, rng.randint(2, 60)) for _ in range(args.sessions)]
    rows = [np.sort(np.array(rng.sample(range(args.records), k), dtype=np.int32)) for k in lengths]
    indptr = np.zeros(len(rows) + 1, dtype=np.int64)
    indptr[1:] = np.cumsum(lengths)
    items = np.concatenate(rows)
    p_time = timed(lambda: K.count_pairs(indptr, items, args.records))
    n_pairs = int(K.count_pairs(indptr, items, args.records)[2].sum())
    return {"backend": K.BACKEND, "query_s": q_time, "pairs_s": p_time, "n_pairs": n_pairs}


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--records", type=int, default=20000)
    p.add_argument("--queries", type=int, default=200)
    p.add_argument("--sessions", type=int, default=20000)
    p.add_argument("--repeat", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--worker", action="store_true", help=argparse.SUPPRESS)
    args = p.parse_args(argv)
    if args.worker:
        print(json.dumps(_worker(args)))
        return 0

    results = []
    for flag in ("0", "1"):
        env = dict(os.environ, VJOURNAL_PURE_NUMPY=flag)
        cmd = [sys.executable, __file__, "--worker"] + [a for a in (argv or sys.argv[1:])]
        out = subprocess.run(cmd, env=env, capture_output=True, text=True, check=True)
        results.append(json.loads(out.stdout.strip().splitlines()[-1]))

    if results[0]["n_pairs"] != results[1]["n_pairs"]:
        print("backends disagree on pair totals", file=sys.stderr)
        return 1
    print(f"records={args.records} queries={args.queries} sessions={args.sessions} pairs={results[0]['n_pairs']}")
    print(f"{'backend':<8} {'queries (s)':>12} {'pair count (s)':>15}")
    for r in results:
        print(f"{r['backend']:<8} {r['query_s']:>12.4f} {r['pairs_s']:>15.4f}")
    if results[0]["backend"] == "numba":
        nb, np_ = results
        print(f"speed-up  {np_['query_s'] / nb['query_s']:>11.2f}x {np_['pairs_s'] / nb['pairs_s']:>14.2f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())

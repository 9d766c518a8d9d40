from __future__ import annotations

import os
import subprocess
import sys
from pathlib import Path
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vjournal import _kernels as K

sorted_sets = st.sets(st.integers(0, 300), max_size=60).map(lambda s: np.array(sorted(s), dtype=np.int32))
rows = st.lists(st.sets(st.integers(0, 40), max_size=8), max_size=25)

BACKENDS = [("numpy", K._np_intersect, K._np_union, K._np_difference, K._np_pair_keys)]
if K.njit is not None:
    BACKENDS.append(("numba", K._nb_intersect, K._nb_union, K._nb_difference, K._nb_pair_keys))


def _csr(rs):
    rows_sorted = [sorted(r) for r in rs]
    indptr = np.zeros(len(rows_sorted) + 1, dtype=np.int64)
    indptr[1:] = np.cumsum([len(r) for r in rows_sorted])
    items = np.array([x for r in rows_sorted for x in r], dtype=np.int32)
    return rows_sorted, indptr, items


@pytest.mark.parametrize("backend", BACKENDS, ids=[b[0] for b in BACKENDS])
@given(a=sorted_sets, b=sorted_sets)
def test_set_algebra_matches_python_sets(backend, a, b):
    _, inter, uni, diff, _ = backend
    sa, sb = set(a.tolist()), set(b.tolist())
    assert inter(a, b).tolist() == sorted(sa & sb)
    assert uni(a, b).tolist() == sorted(sa | sb)
    assert diff(a, b).tolist() == sorted(sa - sb)
    for out in (inter(a, b), uni(a, b), diff(a, b)):
        assert out.dtype == np.int32


@pytest.mark.parametrize("backend", BACKENDS, ids=[b[0] for b in BACKENDS])
@given(rs=rows)
@settings(max_examples=60)
def test_pair_keys_enumerate_every_pair(backend, rs):
    *_, pair_keys = backend
    rows_sorted, indptr, items = _csr(rs)
    want = sorted(a * 41 + b for r in rows_sorted for a, b in combinations(r, 2))
    assert sorted(pair_keys(indptr, items, np.int64(41)).tolist()) == want


@given(rs=rows)
@settings(max_examples=60)
def test_count_pairs(rs):
    rows_sorted, indptr, items = _csr(rs)
    lo, hi, c = K.count_pairs(indptr, items, 41)
    got = {(a, b): n for a, b, n in zip(lo.tolist(), hi.tolist(), c.tolist())}
    want: dict = {}
    for r in rows_sorted:
        for p in combinations(r, 2):
            want[p] = want.get(p, 0) + 1
    assert got == want
    assert all(a < b for a, b in got)


def test_empty_inputs():
    e = np.empty(0, dtype=np.int32)
    assert K.intersect(e, e).size == 0
    assert K.union(e, np.array([3], dtype=np.int32)).tolist() == [3]
    lo, hi, c = K.count_pairs(np.zeros(1, dtype=np.int64), e, 0)
    assert lo.size == hi.size == c.size == 0


def test_env_flag_selects_numpy_backend():
    code = "from vjournal import _kernels as K; import numpy as np; print(K.BACKEND, K.union([1,3],[2]).tolist())"
    env = dict(os.environ, VJOURNAL_PURE_NUMPY="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.split(maxsplit=1) == ["numpy", "[1, 2, 3]\n"]


def test_benchmark_smoke():
    bench = Path(__file__).parents[1] / "benchmarks" / "bench_kernels.py"
    out = subprocess.run(
        [sys.executable, str(bench), "--records", "300", "--queries", "5", "--sessions", "50", "--repeat", "1"],
        capture_output=True, text=True, check=True,
    )
    assert "numpy" in out.stdout

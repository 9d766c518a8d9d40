"""Integer kernels for posting-list algebra and co-read pair enumeration.

Records are addressed by their position in the corpus' sorted id list, so a
sorted ``int32`` array of positions is also sorted by RecordId.

Two interchangeable backends exist. The numba one runs the merge/enumeration
loops compiled; the numpy one uses vectorised set routines. Set
``VJOURNAL_PURE_NUMPY=1`` before import to force the numpy path (numba is
also skipped automatically when it cannot be imported).
"""

from __future__ import annotations

import os

import numpy as np

IDX = np.int32

_FORCE_NUMPY = os.environ.get("VJOURNAL_PURE_NUMPY", "").strip().lower() in {"1", "true", "yes"}

try:
    if _FORCE_NUMPY:
        raise ImportError("numba disabled by VJOURNAL_PURE_NUMPY")
    from numba import njit
except ImportError:
    njit = None

BACKEND = "numpy" if njit is None else "numba"


# -- numpy backend ---------------------------------------------------------


def _np_intersect(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.intersect1d(a, b, assume_unique=True).astype(IDX, copy=False)


def _np_union(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.union1d(a, b).astype(IDX, copy=False)


def _np_difference(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.setdiff1d(a, b, assume_unique=True).astype(IDX, copy=False)


def _np_pair_keys(indptr: np.ndarray, items: np.ndarray, n: int) -> np.ndarray:
    chunks = []
    for s in range(len(indptr) - 1):
        row = items[indptr[s] : indptr[s + 1]]
        k = len(row)
        if k < 2:
            continue
        i, j = np.triu_indices(k, 1)
        chunks.append(row[i].astype(np.int64) * n + row[j])
    if not chunks:
        return np.empty(0, dtype=np.int64)
    return np.concatenate(chunks)


# -- numba backend ---------------------------------------------------------

if njit is not None:

    @njit(cache=True, nogil=True)
    def _nb_intersect(a, b):
        out = np.empty(min(a.size, b.size), dtype=np.int32)
        i = j = k = 0
        while i < a.size and j < b.size:
            if a[i] < b[j]:
                i += 1
            elif a[i] > b[j]:
                j += 1
            else:
                out[k] = a[i]
                k += 1
                i += 1
                j += 1
        return out[:k]

    @njit(cache=True, nogil=True)
    def _nb_union(a, b):
        out = np.empty(a.size + b.size, dtype=np.int32)
        i = j = k = 0
        while i < a.size and j < b.size:
            if a[i] < b[j]:
                out[k] = a[i]
                i += 1
            elif a[i] > b[j]:
                out[k] = b[j]
                j += 1
            else:
                out[k] = a[i]
                i += 1
                j += 1
            k += 1
        while i < a.size:
            out[k] = a[i]
            i += 1
            k += 1
        while j < b.size:
            out[k] = b[j]
            j += 1
            k += 1
        return out[:k]

    @njit(cache=True, nogil=True)
    def _nb_difference(a, b):
        out = np.empty(a.size, dtype=np.int32)
        i = j = k = 0
        while i < a.size:
            while j < b.size and b[j] < a[i]:
                j += 1
            if j < b.size and b[j] == a[i]:
                i += 1
                continue
            out[k] = a[i]
            k += 1
            i += 1
        return out[:k]

    @njit(cache=True, nogil=True)
    def _nb_pair_keys(indptr, items, n):
        total = 0
        for s in range(indptr.size - 1):
            k = indptr[s + 1] - indptr[s]
            total += k * (k - 1) // 2
        out = np.empty(total, dtype=np.int64)
        p = 0
        for s in range(indptr.size - 1):
            lo = indptr[s]
            hi = indptr[s + 1]
            for x in range(lo, hi):
                base = np.int64(items[x]) * n
                for y in range(x + 1, hi):
                    out[p] = base + items[y]
                    p += 1
        return out


def _as_idx(a) -> np.ndarray:
    return np.ascontiguousarray(a, dtype=IDX)


if njit is None:

    def intersect(a, b) -> np.ndarray:
        return _np_intersect(_as_idx(a), _as_idx(b))

    def union(a, b) -> np.ndarray:
        return _np_union(_as_idx(a), _as_idx(b))

    def difference(a, b) -> np.ndarray:
        return _np_difference(_as_idx(a), _as_idx(b))

    def pair_keys(indptr, items, n: int) -> np.ndarray:
        return _np_pair_keys(np.asarray(indptr, dtype=np.int64), _as_idx(items), int(n))

else:

    def intersect(a, b) -> np.ndarray:
        return _nb_intersect(_as_idx(a), _as_idx(b))

    def union(a, b) -> np.ndarray:
        return _nb_union(_as_idx(a), _as_idx(b))

    def difference(a, b) -> np.ndarray:
        return _nb_difference(_as_idx(a), _as_idx(b))

    def pair_keys(indptr, items, n: int) -> np.ndarray:
        return _nb_pair_keys(np.asarray(indptr, dtype=np.int64), _as_idx(items), np.int64(n))


intersect.__doc__ = "Sorted intersection of two sorted, duplicate-free index arrays."
union.__doc__ = "Sorted union of two sorted, duplicate-free index arrays."
difference.__doc__ = "Elements of ``a`` not in ``b``; both sorted and duplicate-free."
pair_keys.__doc__ = """Encode every unordered pair within each CSR row as ``lo * n + hi``.

Rows must be sorted and duplicate-free, so ``lo < hi`` always holds.
"""


def count_pairs(indptr, items, n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Count rows containing each unordered pair. Returns ``(lo, hi, count)`` sorted by key."""
    keys = pair_keys(indptr, items, n)
    if keys.size == 0:
        empty = np.empty(0, dtype=np.int64)
        return empty, empty, empty
    uniq, counts = np.unique(keys, return_counts=True)
    return uniq // n, uniq % n, counts.astype(np.int64)

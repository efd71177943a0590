"""Pure-Python twins of the routines in ``_kernels.pyx``.

Outputs are bit-identical to the compiled versions; the test suite checks this
whenever the extension is importable.
"""

from __future__ import annotations

import math

import numpy as np

MASK64 = 0xFFFFFFFFFFFFFFFF
_INV_2_53 = 1.0 / 9007199254740992.0


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & MASK64


def _step(s0: int, s1: int, s2: int, s3: int):
    result = (_rotl((s1 * 5) & MASK64, 7) * 9) & MASK64
    t = (s1 << 17) & MASK64
    s2 ^= s0
    s3 ^= s1
    s1 ^= s2
    s0 ^= s3
    s2 ^= t
    s3 = _rotl(s3, 45)
    return result, s0, s1, s2, s3


def _load(state: np.ndarray):
    return tuple(int(w) for w in state)


def _store(state: np.ndarray, s0: int, s1: int, s2: int, s3: int) -> None:
    state[:] = np.array([s0, s1, s2, s3], dtype=np.uint64)


def next_u64(state: np.ndarray) -> int:
    r, *s = _step(*_load(state))
    _store(state, *s)
    return r


def fill_u64(state: np.ndarray, count: int) -> np.ndarray:
    s = _load(state)
    out = np.empty(count, dtype=np.uint64)
    for i in range(count):
        r, *s = _step(*s)
        out[i] = r
    _store(state, *s)
    return out


def fill_unit(state: np.ndarray, count: int) -> np.ndarray:
    s = _load(state)
    out = np.empty(count, dtype=np.float64)
    for i in range(count):
        r, *s = _step(*s)
        out[i] = (r >> 11) * _INV_2_53
    _store(state, *s)
    return out


def skip_sample(state: np.ndarray, total: int, p: float) -> np.ndarray:
    if total <= 0 or p <= 0.0:
        return np.empty(0, dtype=np.int64)
    if p >= 1.0:
        return np.arange(total, dtype=np.int64)

    lp = math.log1p(-p)
    s = _load(state)
    cells = []
    cell = -1
    while True:
        r, *s = _step(*s)
        u = (r >> 11) * _INV_2_53
        gap = math.floor(math.log(1.0 - u) / lp)
        if gap >= total - cell:
            break
        cell += 1 + gap
        if cell >= total:
            break
        cells.append(cell)
    _store(state, *s)
    return np.array(cells, dtype=np.int64)


def csr_matvec(row_ptr: np.ndarray, col_idx: np.ndarray, values: np.ndarray,
               x: np.ndarray) -> np.ndarray:
    n = row_ptr.shape[0] - 1
    rows = np.repeat(np.arange(n), np.diff(row_ptr))
    return np.bincount(rows, weights=values * x[col_idx], minlength=n)

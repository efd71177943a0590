# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops: xoshiro256** draws, geometric skip sampling, CSR matvec.

Every routine here has a bit-identical twin in ``_fallback``.  The generator
state is a length-4 ``uint64`` array owned by the caller and advanced in place.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport log, log1p, floor
from libc.stdint cimport uint64_t, int64_t

cnp.import_array()


cdef inline uint64_t _rotl(uint64_t x, int k) nogil:
    return (x << k) | (x >> (64 - k))


cdef inline uint64_t _next(uint64_t* s) nogil:
    cdef uint64_t result = _rotl(s[1] * 5, 7) * 9
    cdef uint64_t t = s[1] << 17
    s[2] ^= s[0]
    s[3] ^= s[1]
    s[1] ^= s[2]
    s[0] ^= s[3]
    s[2] ^= t
    s[3] = _rotl(s[3], 45)
    return result


cdef inline double _unit(uint64_t* s) nogil:
    return <double>(_next(s) >> 11) * (1.0 / 9007199254740992.0)


def next_u64(cnp.uint64_t[::1] state):
    return _next(&state[0])


def fill_u64(cnp.uint64_t[::1] state, Py_ssize_t count):
    cdef cnp.ndarray[cnp.uint64_t, ndim=1] out = np.empty(count, dtype=np.uint64)
    cdef Py_ssize_t i
    cdef uint64_t* s = &state[0]
    for i in range(count):
        out[i] = _next(s)
    return out


def fill_unit(cnp.uint64_t[::1] state, Py_ssize_t count):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(count, dtype=np.float64)
    cdef Py_ssize_t i
    cdef uint64_t* s = &state[0]
    for i in range(count):
        out[i] = _unit(s)
    return out


def skip_sample(cnp.uint64_t[::1] state, int64_t total, double p):
    """Sorted indices in ``[0, total)``, each kept independently with prob. ``p``."""
    cdef uint64_t* s = &state[0]
    cdef double lp, u
    cdef int64_t cell = -1
    cdef double gap
    cdef Py_ssize_t count = 0, cap
    cdef cnp.ndarray[cnp.int64_t, ndim=1] out

    if total <= 0 or p <= 0.0:
        return np.empty(0, dtype=np.int64)
    if p >= 1.0:
        return np.arange(total, dtype=np.int64)

    cap = <Py_ssize_t>(total * p * 1.1) + 16
    out = np.empty(cap, dtype=np.int64)
    lp = log1p(-p)
    while True:
        u = _unit(s)
        gap = floor(log(1.0 - u) / lp)
        if gap >= <double>(total - cell):
            break
        cell += 1 + <int64_t>gap
        if cell >= total:
            break
        if count == cap:
            cap = cap * 2
            out = np.resize(out, cap)
        out[count] = cell
        count += 1
    return out[:count].copy()


def csr_matvec(const cnp.int64_t[::1] row_ptr, const cnp.int64_t[::1] col_idx,
               const cnp.float64_t[::1] values, const cnp.float64_t[::1] x):
    cdef Py_ssize_t n = row_ptr.shape[0] - 1
    cdef cnp.ndarray[cnp.float64_t, ndim=1] y = np.zeros(n, dtype=np.float64)
    cdef Py_ssize_t i, k
    cdef double acc
    with nogil:
        for i in range(n):
            acc = 0.0
            for k in range(row_ptr[i], row_ptr[i + 1]):
                acc = acc + values[k] * x[col_idx[k]]
            y[i] = acc
    return y

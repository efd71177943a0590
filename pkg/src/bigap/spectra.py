"""Sparse symmetric matrices, extreme eigenvalues, and spectral bookkeeping.

Eigenvalues are reported in descending order, ``mu1 >= mu2 >= ... >= mun``.
``lanczos_extreme`` is the production solver; ``dense_eig`` is the brute-force
oracle it is tested against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from ._backend import kernels
from .errors import ConvergenceError, DomainError, IsolatedVertexError, OracleCapError
from .graphgen import BipartiteGraph, Graph
from .rng import Stream

DEFAULT_TOL = 1e-8
DEFAULT_ORACLE_CAP = 1024
LANCZOS_ITER_CAP = 400


class IsolatedPolicy(str, Enum):
    STRICT = "strict"
    LENIENT = "lenient"


# -- matrices ----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SparseSymMatrix:
    """CSR storage of a symmetric matrix, both triangles present."""

    n: int
    row_ptr: np.ndarray
    col_idx: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        for name, dtype in (("row_ptr", np.int64), ("col_idx", np.int64), ("values", np.float64)):
            arr = np.array(getattr(self, name), dtype=dtype)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.row_ptr.shape != (self.n + 1,) or self.row_ptr[-1] != len(self.col_idx):
            raise DomainError("inconsistent CSR arrays")

    @classmethod
    def from_coo(cls, n: int, rows, cols, vals) -> "SparseSymMatrix":
        """Build from triplets; duplicates are summed and zeros dropped."""
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        vals = np.asarray(vals, dtype=np.float64)
        if len(rows):
            key = rows * n + cols
            uniq, inv = np.unique(key, return_inverse=True)
            summed = np.bincount(inv, weights=vals, minlength=len(uniq))
            keep = summed != 0
            uniq, summed = uniq[keep], summed[keep]
            rows, cols = np.divmod(uniq, n)
            vals = summed
        counts = np.bincount(rows, minlength=n)
        row_ptr = np.concatenate(([0], np.cumsum(counts)))
        return cls(n, row_ptr, cols, vals)

    @classmethod
    def from_dense(cls, dense) -> "SparseSymMatrix":
        dense = np.asarray(dense, dtype=np.float64)
        rows, cols = np.nonzero(dense)
        return cls.from_coo(dense.shape[0], rows, cols, dense[rows, cols])

    @property
    def nnz(self) -> int:
        return len(self.values)

    def row_indices(self) -> np.ndarray:
        return np.repeat(np.arange(self.n), np.diff(self.row_ptr))

    def matvec(self, x: np.ndarray) -> np.ndarray:
        x = np.ascontiguousarray(x, dtype=np.float64)
        return kernels.csr_matvec(self.row_ptr, self.col_idx, self.values, x)

    def to_dense(self) -> np.ndarray:
        out = np.zeros((self.n, self.n))
        out[self.row_indices(), self.col_idx] = self.values
        return out

    def scaled(self, factor: float) -> "SparseSymMatrix":
        return SparseSymMatrix(self.n, self.row_ptr, self.col_idx, self.values * factor)

    def __neg__(self) -> "SparseSymMatrix":
        return self.scaled(-1.0)

    def __add__(self, other: "SparseSymMatrix") -> "SparseSymMatrix":
        if other.n != self.n:
            raise DomainError("dimension mismatch")
        return SparseSymMatrix.from_coo(
            self.n,
            np.concatenate((self.row_indices(), other.row_indices())),
            np.concatenate((self.col_idx, other.col_idx)),
            np.concatenate((self.values, other.values)),
        )

    def __sub__(self, other: "SparseSymMatrix") -> "SparseSymMatrix":
        return self + (-other)

    def same_entries(self, other: "SparseSymMatrix") -> bool:
        """Exact entrywise equality."""
        return (
            self.n == other.n
            and np.array_equal(self.row_ptr, other.row_ptr)
            and np.array_equal(self.col_idx, other.col_idx)
            and np.array_equal(self.values, other.values)
        )

    def is_symmetric(self) -> bool:
        rows = self.row_indices()
        fwd = np.lexsort((self.col_idx, rows))
        rev = np.lexsort((rows, self.col_idx))
        return (
            np.array_equal(rows[fwd], self.col_idx[rev])
            and np.array_equal(self.col_idx[fwd], rows[rev])
            and np.array_equal(self.values[fwd], self.values[rev])
        )

    def inf_norm(self) -> float:
        """Induced infinity norm: the largest absolute row sum."""
        if not self.nnz:
            return 0.0
        return float(np.bincount(self.row_indices(), weights=np.abs(self.values), minlength=self.n).max())

    def max_abs(self) -> float:
        return float(np.abs(self.values).max()) if self.nnz else 0.0


def _from_pairs(n: int, a: np.ndarray, b: np.ndarray, vals=None) -> SparseSymMatrix:
    if vals is None:
        vals = np.ones(len(a))
    return SparseSymMatrix.from_coo(
        n, np.concatenate((a, b)), np.concatenate((b, a)), np.concatenate((vals, vals))
    )


def adjacency(g: BipartiteGraph) -> SparseSymMatrix:
    """Adjacency of ``g`` on ``n1 + n2`` vertices, left block first."""
    return _from_pairs(g.n, g.edges[:, 0], g.edges[:, 1] + g.n1)


def adjacency_full(g: Graph) -> SparseSymMatrix:
    return _from_pairs(g.n, g.edges[:, 0], g.edges[:, 1])


def split_blocks(a_prime: SparseSymMatrix, n1: int):
    """Split into (top-left block, off-diagonal blocks, bottom-right block).

    Each part keeps the full dimension; the three sum back to the input exactly.
    """
    if not 0 <= n1 <= a_prime.n:
        raise DomainError(f"n1 = {n1} outside [0, {a_prime.n}]")
    rows = a_prime.row_indices()
    cols = a_prime.col_idx
    left_r, left_c = rows < n1, cols < n1
    masks = (left_r & left_c, left_r != left_c, ~left_r & ~left_c)
    return tuple(
        SparseSymMatrix.from_coo(a_prime.n, rows[m], cols[m], a_prime.values[m]) for m in masks
    )


@dataclass(frozen=True)
class NormalizedAdjacency:
    base: SparseSymMatrix
    isolated_policy: IsolatedPolicy
    isolated: tuple[int, ...] = ()


def _degrees(g: BipartiteGraph, policy: IsolatedPolicy) -> tuple[np.ndarray, tuple[int, ...]]:
    left, right = g.degrees()
    deg = np.concatenate((left, right))
    isolated = np.flatnonzero(deg == 0)
    if len(isolated) and IsolatedPolicy(policy) is IsolatedPolicy.STRICT:
        v = int(isolated[0])
        if v < g.n1:
            raise IsolatedVertexError(v, "left")
        raise IsolatedVertexError(v - g.n1, "right")
    return deg, tuple(int(v) for v in isolated)


def normalized_adjacency(g: BipartiteGraph, policy: IsolatedPolicy | str = IsolatedPolicy.STRICT) -> NormalizedAdjacency:
    """``D^{-1/2} A D^{-1/2}``.

    Under the lenient policy isolated vertices get zero rows and columns and
    therefore contribute eigenvalue 0.
    """
    policy = IsolatedPolicy(policy)
    deg, isolated = _degrees(g, policy)
    a = adjacency(g)
    # isolated vertices have no stored entries, so no zero degree reaches the sqrt
    vals = a.values / np.sqrt((deg[a.row_indices()] * deg[a.col_idx]).astype(np.float64))
    base = SparseSymMatrix(a.n, a.row_ptr, a.col_idx, vals)
    return NormalizedAdjacency(base, policy, isolated)


# -- spectra -------------------------------------------------------------------


@dataclass(frozen=True)
class SpectralSummary:
    mu1: float
    mu2: float
    mu_second_last: float
    mu_min: float
    mu_abs: float
    mu_plus: float | None
    mu_plus_certified: bool
    residual: float
    method: str
    iterations: int = 0


def zero_threshold(values: np.ndarray, tol: float = DEFAULT_TOL) -> float:
    """Magnitude below which a computed eigenvalue is treated as zero."""
    scale = float(np.abs(values).max()) if len(values) else 0.0
    return max(tol, 1e-12 * scale)


def _summary(top: np.ndarray, bottom: np.ndarray, residual: float, method: str,
             iterations: int, positives: np.ndarray, certified: bool) -> SpectralSummary:
    """``top`` descending from mu1, ``bottom`` ascending from mun."""
    mu1 = float(top[0])
    mu2 = float(top[1]) if len(top) > 1 else mu1
    mu_min = float(bottom[0])
    mu_sl = float(bottom[1]) if len(bottom) > 1 else mu_min
    mu_plus = float(positives.min()) if len(positives) else None
    return SpectralSummary(
        mu1=mu1,
        mu2=mu2,
        mu_second_last=mu_sl,
        mu_min=mu_min,
        mu_abs=max(abs(mu2), abs(mu_min)),
        mu_plus=mu_plus,
        mu_plus_certified=certified,
        residual=residual,
        method=method,
        iterations=iterations,
    )


def dense_eig(m: SparseSymMatrix, cap: int = DEFAULT_ORACLE_CAP) -> np.ndarray:
    """All eigenvalues, ascending, from LAPACK on the densified matrix."""
    if m.n > cap:
        raise OracleCapError(m.n, cap)
    return np.linalg.eigvalsh(m.to_dense())


def dense_summary(m: SparseSymMatrix, cap: int = DEFAULT_ORACLE_CAP) -> SpectralSummary:
    dense = m.to_dense() if m.n <= cap else None
    if dense is None:
        raise OracleCapError(m.n, cap)
    vals, vecs = np.linalg.eigh(dense)
    resid = np.linalg.norm(dense @ vecs - vecs * vals, axis=0)
    picks = np.r_[0:min(2, m.n), max(0, m.n - 2):m.n]
    positives = vals[vals > zero_threshold(vals)]
    return _summary(vals[::-1], vals, float(resid[picks].max()), "dense", 0, positives, True)


def lanczos_extreme(
    m: SparseSymMatrix,
    k_each_end: int = 2,
    tol: float = DEFAULT_TOL,
    max_iter: int | None = None,
    stream: Stream | None = None,
    check_every: int = 10,
) -> SpectralSummary:
    """Extreme eigenvalues by Lanczos with full reorthogonalization.

    Ritz values are taken from both ends of the tridiagonal matrix.  When the
    Krylov space becomes invariant the iteration restarts from a fresh random
    vector orthogonal to everything seen so far, so repeated eigenvalues are
    recovered.  Raises ``ConvergenceError`` if the reported pairs do not reach
    ``||Mv - theta v|| <= tol`` within ``max_iter`` steps.
    """
    n = m.n
    if k_each_end < 1:
        raise DomainError("k_each_end must be >= 1")
    if n < 2 * k_each_end:
        return dense_summary(m, cap=max(n, DEFAULT_ORACLE_CAP))
    if max_iter is None:
        max_iter = min(n, LANCZOS_ITER_CAP)
    max_iter = min(max_iter, n)
    if stream is None:
        stream = Stream(0)

    Q = np.zeros((max_iter, n))
    alpha = np.zeros(max_iter)
    beta = np.zeros(max_iter)  # beta[j] couples q_j and q_{j+1}
    breakdown_tol = 1e-12 * max(1.0, m.max_abs())
    invariant_steps = 0  # steps whose trailing beta vanished

    def start_vector(j: int) -> np.ndarray | None:
        for _ in range(3):
            v = stream.random(n) - 0.5
            for _ in range(2):
                v -= Q[:j].T @ (Q[:j] @ v)
            norm = np.linalg.norm(v)
            if norm > 1e-8:
                return v / norm
        return None

    def ritz(j: int):
        T = np.diag(alpha[:j]) + np.diag(beta[: j - 1], 1) + np.diag(beta[: j - 1], -1)
        theta, y = np.linalg.eigh(T)
        est = np.abs(beta[j - 1] * y[-1, :])
        return theta, y, est

    def pick(j: int) -> np.ndarray:
        k = min(k_each_end, j)
        return np.unique(np.r_[0:k, j - k : j])

    q = start_vector(0)
    j = 0
    best = math.inf
    exhausted = False
    while True:
        Q[j] = q
        w = m.matvec(q)
        alpha[j] = q @ w
        w -= alpha[j] * q
        if j > 0:
            w -= beta[j - 1] * Q[j - 1]
        for _ in range(2):
            w -= Q[: j + 1].T @ (Q[: j + 1] @ w)
        b = np.linalg.norm(w)
        j += 1
        if j == n:
            beta[j - 1] = 0.0
            exhausted = True
            break
        if b <= breakdown_tol:
            beta[j - 1] = 0.0
            invariant_steps += 1
            if j >= max_iter:
                break
            q = start_vector(j)
            if q is None:
                exhausted = True
                break
            continue
        beta[j - 1] = b
        q = w / b
        if j >= max_iter:
            break
        if j >= 2 * k_each_end and j % check_every == 0:
            theta, y, est = ritz(j)
            sel = pick(j)
            best = min(best, float(est[sel].max()))
            if est[sel].max() <= 0.1 * tol:
                resid = _explicit_residual(m, Q[:j], theta, y, sel)
                if resid <= tol:
                    return _lanczos_result(theta, sel, resid, j, k_each_end, exhausted=False)

    theta, y, est = ritz(j)
    sel = pick(j)
    resid = _explicit_residual(m, Q[:j], theta, y, sel)
    if resid <= tol:
        return _lanczos_result(theta, sel, resid, j, k_each_end, exhausted=exhausted)
    raise ConvergenceError("Lanczos did not converge", min(best, resid), j)


def _explicit_residual(m, Qj, theta, y, sel) -> float:
    worst = 0.0
    for idx in sel:
        v = Qj.T @ y[:, idx]
        r = m.matvec(v) - theta[idx] * v
        worst = max(worst, float(np.linalg.norm(r) / np.linalg.norm(v)))
    return worst


def _lanczos_result(theta, sel, resid, iterations, k_each_end, exhausted) -> SpectralSummary:
    k = min(k_each_end, len(theta))
    top = theta[::-1][:k]
    bottom = theta[:k]
    zero = zero_threshold(theta)
    if exhausted:
        positives = theta[theta > zero]
        certified = True
    else:
        positives = top[top > zero]
        # the least positive eigenvalue is pinned only if the top-end values cross zero
        certified = bool(len(positives)) and bool((top <= zero).any())
    return _summary(top, bottom, resid, "lanczos", iterations, positives, certified)


def extreme_spectrum(m: SparseSymMatrix, tol: float = DEFAULT_TOL, max_iter: int | None = None,
                     stream: Stream | None = None, oracle_cap: int = DEFAULT_ORACLE_CAP,
                     prefer_dense: bool = False) -> SpectralSummary:
    """Dense oracle when requested and within the cap, Lanczos otherwise."""
    if prefer_dense and m.n <= oracle_cap:
        return dense_summary(m, oracle_cap)
    return lanczos_extreme(m, 2, tol, max_iter, stream)


# -- checks ------------------------------------------------------------------


def check_bipartite_symmetry(eigs, tol: float = 1e-9) -> tuple[bool, float]:
    """Compare a sorted spectrum with its own negation, reversed."""
    e = np.asarray(eigs, dtype=np.float64)
    if not len(e):
        return True, 0.0
    defect = float(np.abs(e + e[::-1]).max())
    return defect <= tol, defect


def negation_spectrum_check(eigs, eigs_neg, tol: float = 1e-10) -> bool:
    """``mu_i(-M) == -mu_{n+1-i}(M)`` for both lists sorted descending."""
    e = np.asarray(eigs, dtype=np.float64)
    en = np.asarray(eigs_neg, dtype=np.float64)
    if e.shape != en.shape:
        raise DomainError(f"length mismatch: {len(e)} vs {len(en)}")
    return bool(np.all(np.abs(en + e[::-1]) <= tol))


@dataclass(frozen=True)
class KResidual:
    """Size of ``K = A / sqrt(n1 n2 p^2) - D^{-1/2} A D^{-1/2}``.

    ``value`` uses the chosen norm; ``scaled`` is ``value * sqrt(n1 n2 p^2)``.
    Both norms are always reported.
    """

    value: float
    scaled: float
    norm: str
    max_entry: float
    induced_inf: float


def k_residual(g: BipartiteGraph, p: float | None = None, norm: str = "max",
               policy: IsolatedPolicy | str = IsolatedPolicy.STRICT) -> KResidual:
    """Distance between the degree-scaled and the normalized adjacency.

    ``p`` defaults to the edge density ``m / (n1 n2)``.  ``norm="max"`` is the
    largest absolute entry; ``norm="inf"`` the largest absolute row sum.
    """
    if norm not in ("max", "inf"):
        raise DomainError(f"unknown norm {norm!r}")
    if p is None:
        p = g.m / (g.n1 * g.n2)
    if not 0 < p <= 1:
        raise DomainError(f"p must lie in (0, 1], got {p}")
    scale = math.sqrt(g.n1 * g.n2 * p * p)
    normalized = normalized_adjacency(g, policy).base
    a = adjacency(g)
    # same sparsity pattern, so the difference is entrywise on values
    diff = SparseSymMatrix(a.n, a.row_ptr, a.col_idx, a.values / scale - normalized.values)
    max_entry = diff.max_abs()
    induced = diff.inf_norm()
    value = max_entry if norm == "max" else induced
    return KResidual(value, value * scale, norm, max_entry, induced)

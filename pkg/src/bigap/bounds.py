"""Closed-form bound evaluators and spectrum comparison predicates.

Every evaluator returns the bound *without* its ``1 + o(1)`` factor; callers
apply an explicit slack multiplier instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError


def _positive_p(p: float) -> float:
    p = float(p)
    if not 0.0 < p <= 1.0:
        raise DomainError(f"p must lie in (0, 1], got {p}")
    return p


def theorem_bound(n1: int, n2: int, p: float) -> float:
    """``2 (sqrt((n1 + n2) p) + sqrt(n1 p) + sqrt(n2 p))``, the mu2 ceiling."""
    p = _positive_p(p)
    if n1 < 1 or n2 < 1:
        raise DomainError(f"need n1, n2 >= 1, got ({n1}, {n2})")
    return 2.0 * (math.sqrt((n1 + n2) * p) + math.sqrt(n1 * p) + math.sqrt(n2 * p))


def fk_bound(n: int, p: float) -> float:
    """``2 sqrt(n p)``: the nontrivial-eigenvalue scale of G(n, p)."""
    p = _positive_p(p)
    if n < 1:
        raise DomainError(f"need n >= 1, got {n}")
    return 2.0 * math.sqrt(n * p)


def ab_bipartite(d_left: float, d_right: float) -> float:
    """Bipartite Alon-Boppana value ``sqrt(dL - 1) + sqrt(dR - 1)``."""
    if d_left < 1 or d_right < 1:
        raise DomainError(f"degrees must be >= 1, got ({d_left}, {d_right})")
    return math.sqrt(d_left - 1) + math.sqrt(d_right - 1)


def normalized_gap_bound(n1: float, n2: float, p: float) -> float:
    """Ceiling on ``max_{i != 1, n} |mu_i(G) - 1|``.

    ``2 (sqrt(1/(n1 p) + 1/(n2 p)) + 1/sqrt(n1 p) + 1/sqrt(n2 p))``.
    """
    a, b = n1 * p, n2 * p
    if not (a > 0 and b > 0):
        raise DomainError(f"need n1*p > 0 and n2*p > 0, got ({a}, {b})")
    return 2.0 * (math.sqrt(1.0 / a + 1.0 / b) + 1.0 / math.sqrt(a) + 1.0 / math.sqrt(b))


@dataclass(frozen=True)
class BoundReport:
    theorem_bound_value: float
    fk_bound_value: float
    ab_bipartite_value: float
    normalized_bound_value: float
    slack: float = 1.0


def bound_report(n1: int, n2: int, p: float, slack: float = 1.0) -> BoundReport:
    """All bounds at one parameter point.

    Alon-Boppana is evaluated at the expected degrees ``(n2 p, n1 p)`` and is
    0 when either is below 1.
    """
    d_left, d_right = n2 * p, n1 * p
    ab = ab_bipartite(d_left, d_right) if min(d_left, d_right) >= 1 else 0.0
    return BoundReport(
        theorem_bound_value=theorem_bound(n1, n2, p),
        fk_bound_value=fk_bound(n1 + n2, p),
        ab_bipartite_value=ab,
        normalized_bound_value=normalized_gap_bound(n1, n2, p),
        slack=slack,
    )


def weyl_check(eigs_a, eigs_b, eigs_ab, tol: float = 1e-9) -> tuple[bool, float]:
    """Check ``mu_i(A) + mu_n(B) <= mu_i(A+B) <= mu_i(A) + mu_1(B)`` for all i.

    All three lists sorted descending.  Returns (ok, worst violation), where a
    violation is the amount by which either side is exceeded (0 if none).
    """
    a = np.asarray(eigs_a, dtype=np.float64)
    b = np.asarray(eigs_b, dtype=np.float64)
    ab = np.asarray(eigs_ab, dtype=np.float64)
    if not (a.shape == b.shape == ab.shape):
        raise DomainError(f"length mismatch: {len(a)}, {len(b)}, {len(ab)}")
    if not len(a):
        return True, 0.0
    lower = a + b[-1] - ab
    upper = ab - (a + b[0])
    worst = float(max(lower.max(), upper.max(), 0.0))
    return worst <= tol, worst


def regime_check(n1: int, n2: int, p: float) -> tuple[bool, bool]:
    """Whether ``sqrt(n_i p) >= ln(n_i)**3`` holds on each side.

    A finite-size reading of the theorem's growth hypothesis; advisory only.
    """
    p = max(float(p), 0.0)
    return tuple(math.sqrt(n * p) >= math.log(n) ** 3 for n in (n1, n2))

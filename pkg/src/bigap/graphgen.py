"""Seeded sampling of G(n, p), G(n1, n2, p) and the union embedding G'.

All samplers use geometric skip sampling over a linearized cell index: the gap
to the next present cell is ``floor(log(1 - u) / log(1 - p))``, which costs one
draw per edge instead of one per cell.

Bipartite cells are ordered ``c = i * n2 + j``.  Plain-graph cells are pairs
``(a, b)`` with ``a < b``, ordered ``c = b * (b - 1) / 2 + a``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._backend import kernels
from .errors import DomainError, EdgeListError
from .rng import SeedSpec, Stream, derive_stream

__all__ = [
    "BipartiteGraph",
    "Graph",
    "DegreeStats",
    "SeedSpec",
    "derive_stream",
    "sample_bipartite",
    "sample_er",
    "embed_union",
    "degree_stats",
    "complete_bipartite",
    "write_bipartite",
    "read_bipartite",
    "write_graph",
    "read_graph",
]


def _frozen(edges) -> np.ndarray:
    arr = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    arr = np.array(arr)  # own the buffer before freezing it
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class BipartiteGraph:
    """Vertex counts plus cross edges ``(i, j)``, meaning edge ``(u_i, v_j)``."""

    n1: int
    n2: int
    edges: np.ndarray

    def __post_init__(self):
        if self.n1 < 1 or self.n2 < 1:
            raise DomainError(f"need n1, n2 >= 1, got ({self.n1}, {self.n2})")
        edges = _frozen(self.edges)
        object.__setattr__(self, "edges", edges)
        if len(edges):
            i, j = edges[:, 0], edges[:, 1]
            if i.min() < 0 or i.max() >= self.n1 or j.min() < 0 or j.max() >= self.n2:
                raise DomainError("edge index out of range")
            if len(np.unique(i * self.n2 + j)) != len(edges):
                raise DomainError("duplicate edge")

    @property
    def m(self) -> int:
        return len(self.edges)

    @property
    def n(self) -> int:
        return self.n1 + self.n2

    def degrees(self) -> tuple[np.ndarray, np.ndarray]:
        left = np.bincount(self.edges[:, 0], minlength=self.n1)
        right = np.bincount(self.edges[:, 1], minlength=self.n2)
        return left, right

    def __eq__(self, other):
        if not isinstance(other, BipartiteGraph):
            return NotImplemented
        return (self.n1, self.n2) == (other.n1, other.n2) and np.array_equal(
            _sorted_rows(self.edges), _sorted_rows(other.edges)
        )

    __hash__ = None


@dataclass(frozen=True, eq=False)
class Graph:
    """Simple undirected graph; edges are stored as ``(a, b)`` with ``a < b``."""

    n: int
    edges: np.ndarray

    def __post_init__(self):
        if self.n < 1:
            raise DomainError(f"need n >= 1, got {self.n}")
        edges = _frozen(self.edges)
        if len(edges):
            if (edges[:, 0] == edges[:, 1]).any():
                raise DomainError("self-loop")
            edges = _frozen(np.sort(edges, axis=1))
            if edges.min() < 0 or edges.max() >= self.n:
                raise DomainError("edge index out of range")
            if len(np.unique(edges[:, 0] * self.n + edges[:, 1])) != len(edges):
                raise DomainError("duplicate edge")
        object.__setattr__(self, "edges", edges)

    @property
    def m(self) -> int:
        return len(self.edges)

    def degrees(self) -> np.ndarray:
        return np.bincount(self.edges.ravel(), minlength=self.n)

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return self.n == other.n and np.array_equal(
            _sorted_rows(self.edges), _sorted_rows(other.edges)
        )

    __hash__ = None


def _sorted_rows(edges: np.ndarray) -> np.ndarray:
    if not len(edges):
        return edges
    return edges[np.lexsort((edges[:, 1], edges[:, 0]))]


@dataclass(frozen=True)
class DegreeStats:
    min_left: int
    max_left: int
    min_right: int
    max_right: int
    expected_left: float
    expected_right: float
    # None when undefined (p = 0); never reported as 0 in that case
    rel_dev: float | None


def _check_p(p: float) -> float:
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"p must lie in [0, 1], got {p}")
    return p


def _pair_cells(n: int, cells: np.ndarray) -> np.ndarray:
    """Map triangular cell indices to ``(a, b)`` pairs with ``a < b``."""
    c = cells.astype(np.int64)
    b = ((1 + np.sqrt(1 + 8 * c.astype(np.float64))) // 2).astype(np.int64)
    # float sqrt can be off by one near perfect squares
    b -= b * (b - 1) // 2 > c
    b += (b + 1) * b // 2 <= c
    a = c - b * (b - 1) // 2
    return np.column_stack((a, b))


def sample_bipartite(n1: int, n2: int, p: float, stream: Stream) -> BipartiteGraph:
    if n1 < 1 or n2 < 1:
        raise DomainError(f"need n1, n2 >= 1, got ({n1}, {n2})")
    p = _check_p(p)
    cells = kernels.skip_sample(stream.state, n1 * n2, p)
    edges = np.column_stack((cells // n2, cells % n2))
    return BipartiteGraph(n1, n2, edges)


def sample_er(n: int, p: float, stream: Stream) -> Graph:
    if n < 1:
        raise DomainError(f"need n >= 1, got {n}")
    p = _check_p(p)
    cells = kernels.skip_sample(stream.state, n * (n - 1) // 2, p)
    return Graph(n, _pair_cells(n, cells))


def embed_union(g: BipartiteGraph, p: float, stream: Stream) -> Graph:
    """Add each within-side edge of ``g`` independently with probability ``p``.

    Left vertices keep their labels ``[0, n1)``, right vertices move to
    ``[n1, n1 + n2)``, so the adjacency matrix of the result has the cross
    block of ``g`` off the diagonal.  Draws the left side first, then the right.
    If ``g`` is itself ``G(n1, n2, p)`` the result is distributed as
    ``G(n1 + n2, p)``.
    """
    p = _check_p(p)
    n1, n2 = g.n1, g.n2
    left = _pair_cells(n1, kernels.skip_sample(stream.state, n1 * (n1 - 1) // 2, p))
    right = _pair_cells(n2, kernels.skip_sample(stream.state, n2 * (n2 - 1) // 2, p)) + n1
    cross = g.edges + np.array([0, n1], dtype=np.int64)
    edges = _sorted_rows(np.concatenate((left, cross, right)))
    return Graph(n1 + n2, edges)


def degree_stats(g: BipartiteGraph, p: float) -> DegreeStats:
    p = _check_p(p)
    left, right = g.degrees()
    expected_left = g.n2 * p
    expected_right = g.n1 * p
    if expected_left > 0 and expected_right > 0:
        rel_dev = max(
            float(np.abs(left - expected_left).max()) / expected_left,
            float(np.abs(right - expected_right).max()) / expected_right,
        )
    else:
        rel_dev = None
    return DegreeStats(
        min_left=int(left.min()),
        max_left=int(left.max()),
        min_right=int(right.min()),
        max_right=int(right.max()),
        expected_left=expected_left,
        expected_right=expected_right,
        rel_dev=rel_dev,
    )


def complete_bipartite(n1: int, n2: int) -> BipartiteGraph:
    i, j = np.divmod(np.arange(n1 * n2, dtype=np.int64), n2)
    return BipartiteGraph(n1, n2, np.column_stack((i, j)))


# -- edge-list files ---------------------------------------------------------


def write_bipartite(g: BipartiteGraph, path) -> None:
    lines = [f"{g.n1} {g.n2} {g.m}"]
    lines.extend(f"{i} {j}" for i, j in _sorted_rows(g.edges).tolist())
    Path(path).write_bytes(("\n".join(lines) + "\n").encode("ascii"))


def write_graph(g: Graph, path) -> None:
    lines = [f"{g.n} {g.m}"]
    lines.extend(f"{a} {b}" for a, b in _sorted_rows(g.edges).tolist())
    Path(path).write_bytes(("\n".join(lines) + "\n").encode("ascii"))


def _parse_ints(line: str, count: int, lineno: int) -> list[int]:
    parts = line.split()
    if len(parts) != count:
        raise EdgeListError(f"expected {count} integers, got {line!r}", lineno)
    try:
        return [int(x) for x in parts]
    except ValueError:
        raise EdgeListError(f"non-integer field in {line!r}", lineno) from None


def _read_lines(path) -> list[str]:
    text = Path(path).read_text(encoding="ascii")
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise EdgeListError("empty file", 1)
    return lines


def read_bipartite(path) -> BipartiteGraph:
    lines = _read_lines(path)
    n1, n2, m = _parse_ints(lines[0], 3, 1)
    if len(lines) - 1 != m:
        raise EdgeListError(f"header promises {m} edges, file has {len(lines) - 1}", 1)
    edges = []
    for lineno, line in enumerate(lines[1:], start=2):
        i, j = _parse_ints(line, 2, lineno)
        if not (0 <= i < n1 and 0 <= j < n2):
            raise EdgeListError(f"edge ({i}, {j}) out of range", lineno)
        edges.append((i, j))
    try:
        return BipartiteGraph(n1, n2, np.array(edges, dtype=np.int64).reshape(-1, 2))
    except DomainError as exc:
        raise EdgeListError(str(exc), 1) from None


def read_graph(path) -> Graph:
    lines = _read_lines(path)
    n, m = _parse_ints(lines[0], 2, 1)
    if len(lines) - 1 != m:
        raise EdgeListError(f"header promises {m} edges, file has {len(lines) - 1}", 1)
    edges = []
    for lineno, line in enumerate(lines[1:], start=2):
        a, b = _parse_ints(line, 2, lineno)
        if not (0 <= a < b < n):
            raise EdgeListError(f"pair ({a}, {b}) must satisfy 0 <= a < b < n", lineno)
        edges.append((a, b))
    try:
        return Graph(n, np.array(edges, dtype=np.int64).reshape(-1, 2))
    except DomainError as exc:
        raise EdgeListError(str(exc), 1) from None


def expected_sd(cells: int, p: float) -> float:
    """Standard deviation of a Binomial(cells, p) edge count."""
    return math.sqrt(cells * p * (1 - p))

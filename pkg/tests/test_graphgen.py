import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from bigap.errors import DomainError, EdgeListError
from bigap.graphgen import (
    BipartiteGraph,
    Graph,
    _pair_cells,
    complete_bipartite,
    degree_stats,
    embed_union,
    read_bipartite,
    read_graph,
    sample_bipartite,
    sample_er,
    write_bipartite,
    write_graph,
)
from bigap.rng import SeedSpec, Stream, derive_stream


def stream(k=0, seed=12345):
    return derive_stream(SeedSpec(seed, k))


class TestSampleBipartite:
    def test_p_zero(self):
        assert sample_bipartite(4, 7, 0.0, stream()).m == 0

    def test_p_one(self):
        g = sample_bipartite(4, 7, 1.0, stream())
        assert g.m == 28
        assert g == complete_bipartite(4, 7)

    @pytest.mark.parametrize("p", [-0.1, 1.5, math.nan])
    def test_bad_p(self, p):
        with pytest.raises(DomainError):
            sample_bipartite(3, 3, p, stream())

    def test_mean_edge_count(self):
        # Binomial(10^6, 0.03): mean 30000, sd sqrt(10^6 * 0.03 * 0.97)
        sd = math.sqrt(1e6 * 0.03 * 0.97)
        counts = [sample_bipartite(1000, 1000, 0.03, stream(k)).m for k in range(200)]
        assert abs(np.mean(counts) - 30000) <= 3 * sd / math.sqrt(200)
        assert abs(np.std(counts) - sd) <= 0.25 * sd

    def test_chi_squared_edge_counts(self):
        # 500 draws of Binomial(1200, 0.2), pooled into bins with expected count >= 5
        counts = np.array([sample_bipartite(30, 40, 0.2, stream(k, seed=77)).m for k in range(500)])
        dist = stats.binom(1200, 0.2)
        cuts = np.arange(210, 271, 5)  # bins (-inf, 210), [210, 215), ..., [270, inf)
        cdf = np.concatenate(([0.0], dist.cdf(cuts - 1), [1.0]))
        expected = np.diff(cdf) * len(counts)
        observed = np.bincount(np.searchsorted(cuts, counts, side="right"), minlength=len(expected))
        assert expected.min() >= 5
        _, pvalue = stats.chisquare(observed, expected)
        assert pvalue > 0.001

    def test_each_cell_equally_likely(self):
        hits = np.zeros((5, 6))
        for k in range(2000):
            g = sample_bipartite(5, 6, 0.3, stream(k, seed=5))
            hits[g.edges[:, 0], g.edges[:, 1]] += 1
        _, pvalue = stats.chisquare(hits.ravel())
        assert pvalue > 0.001
        assert abs(hits.mean() / 2000 - 0.3) < 0.01

    def test_deterministic(self):
        a = sample_bipartite(50, 60, 0.1, stream(4))
        b = sample_bipartite(50, 60, 0.1, stream(4))
        np.testing.assert_array_equal(a.edges, b.edges)


class TestSampleER:
    def test_p_zero(self):
        assert sample_er(5, 0.0, stream()).m == 0

    def test_p_one_is_k5(self):
        g = sample_er(5, 1.0, stream())
        assert g.m == 10
        assert set(map(tuple, g.edges.tolist())) == {(a, b) for a in range(5) for b in range(a + 1, 5)}

    def test_edge_count(self):
        cells = 500 * 499 // 2
        sd = math.sqrt(cells * 0.1 * 0.9)
        counts = [sample_er(500, 0.1, stream(k)).m for k in range(50)]
        assert abs(np.mean(counts) - 12475) <= 3 * sd / math.sqrt(50)

    def test_single_vertex(self):
        assert sample_er(1, 0.5, stream()).m == 0

    def test_bad_p(self):
        with pytest.raises(DomainError):
            sample_er(5, 2.0, stream())


@given(st.integers(1, 3000))
def test_pair_cells_roundtrip(n):
    total = n * (n - 1) // 2
    cells = np.unique(np.r_[0:min(total, 50), max(0, total - 50):total]).astype(np.int64)
    pairs = _pair_cells(n, cells)
    a, b = pairs[:, 0], pairs[:, 1]
    assert np.all((0 <= a) & (a < b) & (b < n))
    np.testing.assert_array_equal(b * (b - 1) // 2 + a, cells)


def test_pair_cells_large_index_exact():
    n = 200_000
    cells = np.array([n * (n - 1) // 2 - 1, (n - 1) * (n - 2) // 2, (n - 1) * (n - 2) // 2 - 1])
    pairs = _pair_cells(n, cells)
    assert pairs.tolist() == [[n - 2, n - 1], [0, n - 1], [n - 3, n - 2]]


class TestEmbedUnion:
    def test_empty_2x2(self):
        g = BipartiteGraph(2, 2, np.empty((0, 2)))
        gp = embed_union(g, 1.0, stream())
        assert gp.edges.tolist() == [[0, 1], [2, 3]]

    def test_complete_2x3_gives_k5(self):
        gp = embed_union(complete_bipartite(2, 3), 1.0, stream())
        assert gp == sample_er(5, 1.0, stream())

    @settings(max_examples=30, deadline=None)
    @given(st.integers(1, 25), st.integers(1, 25), st.floats(0, 1), st.integers(0, 2**32))
    def test_cross_edges_preserved(self, n1, n2, p, seed):
        s = Stream(seed)
        g = sample_bipartite(n1, n2, p, s)
        gp = embed_union(g, p, s)
        e = gp.edges
        cross = e[(e[:, 0] < n1) & (e[:, 1] >= n1)]
        restricted = BipartiteGraph(n1, n2, cross - np.array([0, n1]))
        assert restricted == g

    def test_total_edges_match_gnp(self):
        cells = 600 * 599 // 2
        sd = math.sqrt(cells * 0.05 * 0.95)
        counts = []
        for k in range(200):
            s = stream(k, seed=9)
            counts.append(embed_union(sample_bipartite(300, 300, 0.05, s), 0.05, s).m)
        assert abs(np.mean(counts) - cells * 0.05) <= 3 * sd / math.sqrt(200)
        assert abs(np.std(counts) - sd) <= 0.25 * sd


class TestDegreeStats:
    def test_complete(self):
        d = degree_stats(complete_bipartite(2, 3), 1.0)
        assert (d.min_left, d.max_left, d.min_right, d.max_right) == (3, 3, 2, 2)
        assert d.rel_dev == 0

    def test_empty_p_zero_undefined(self):
        d = degree_stats(BipartiteGraph(2, 3, []), 0.0)
        assert (d.min_left, d.max_left, d.min_right, d.max_right) == (0, 0, 0, 0)
        assert d.rel_dev is None

    def test_concentration(self):
        devs = [degree_stats(sample_bipartite(1000, 1000, 0.1, stream(k)), 0.1).rel_dev for k in range(100)]
        assert sum(d <= 0.5 for d in devs) >= 99


class TestGraphTypes:
    def test_duplicate_rejected(self):
        with pytest.raises(DomainError):
            BipartiteGraph(2, 2, [(0, 1), (0, 1)])

    def test_out_of_range_rejected(self):
        with pytest.raises(DomainError):
            BipartiteGraph(2, 2, [(2, 0)])

    def test_self_loop_rejected(self):
        with pytest.raises(DomainError):
            Graph(3, [(1, 1)])

    def test_graph_edges_canonical(self):
        assert Graph(3, [(2, 0)]).edges.tolist() == [[0, 2]]

    def test_immutable(self):
        g = complete_bipartite(2, 2)
        with pytest.raises(ValueError):
            g.edges[0, 0] = 1


class TestEdgeListFiles:
    def test_bipartite_roundtrip(self, tmp_path):
        g = sample_bipartite(20, 30, 0.2, stream())
        write_bipartite(g, tmp_path / "g.txt")
        assert read_bipartite(tmp_path / "g.txt") == g

    def test_bipartite_format(self, tmp_path):
        write_bipartite(complete_bipartite(1, 2), tmp_path / "g.txt")
        assert (tmp_path / "g.txt").read_bytes() == b"1 2 2\n0 0\n0 1\n"

    def test_graph_roundtrip(self, tmp_path):
        g = sample_er(30, 0.3, stream())
        write_graph(g, tmp_path / "g.txt")
        assert read_graph(tmp_path / "g.txt") == g
        first = (tmp_path / "g.txt").read_text().splitlines()[1].split()
        assert int(first[0]) < int(first[1])

    @pytest.mark.parametrize("text,lineno", [
        ("2 2 1\n0 5\n", 2),
        ("2 2 2\n0 0\n", 1),
        ("2 x 0\n", 1),
        ("2 2 1\n0\n", 2),
        ("", 1),
    ])
    def test_malformed(self, tmp_path, text, lineno):
        (tmp_path / "bad.txt").write_text(text)
        with pytest.raises(EdgeListError) as info:
            read_bipartite(tmp_path / "bad.txt")
        assert info.value.lineno == lineno

import numpy as np
import pytest

from bigap import _backend, _fallback
from bigap.rng import Stream
from bigap.spectra import SparseSymMatrix

needs_compiled = pytest.mark.skipif("cython" not in _backend.available(), reason="extension not built")


@needs_compiled
@pytest.mark.parametrize("total,p", [(10**6, 0.03), (1200, 0.2), (45, 0.5), (7, 1.0), (7, 0.0), (0, 0.5), (300, 0.999)])
def test_skip_sample_backends_bit_identical(total, p):
    compiled = _backend.available()["cython"]
    a, b = Stream(11), Stream(11)
    x = compiled.skip_sample(a.state, total, p)
    y = _fallback.skip_sample(b.state, total, p)
    np.testing.assert_array_equal(x, y)
    np.testing.assert_array_equal(a.state, b.state)


@needs_compiled
def test_draws_backends_bit_identical():
    compiled = _backend.available()["cython"]
    a, b = Stream(3), Stream(3)
    np.testing.assert_array_equal(compiled.fill_u64(a.state, 500), _fallback.fill_u64(b.state, 500))
    np.testing.assert_array_equal(compiled.fill_unit(a.state, 500), _fallback.fill_unit(b.state, 500))
    assert compiled.next_u64(a.state) == _fallback.next_u64(b.state)


def test_skip_sample_sorted_unique_in_range(backend):
    s = Stream(5)
    cells = backend.skip_sample(s.state, 5000, 0.3)
    assert np.all(np.diff(cells) > 0)
    assert cells.min() >= 0 and cells.max() < 5000


def test_skip_sample_extremes(backend):
    s = Stream(5)
    before = s.state.copy()
    assert len(backend.skip_sample(s.state, 100, 0.0)) == 0
    np.testing.assert_array_equal(backend.skip_sample(s.state, 100, 1.0), np.arange(100))
    # degenerate probabilities consume no draws
    np.testing.assert_array_equal(s.state, before)


def test_unit_draws_in_range(backend):
    u = backend.fill_unit(Stream(1).state, 10000)
    assert u.min() >= 0.0 and u.max() < 1.0
    assert abs(u.mean() - 0.5) < 4 * np.sqrt(1 / 12 / 10000)


def test_csr_matvec_matches_dense(backend):
    rng = np.random.default_rng(0)
    dense = rng.normal(size=(30, 30)) * (rng.random((30, 30)) < 0.2)
    dense = dense + dense.T
    m = SparseSymMatrix.from_dense(dense)
    x = rng.normal(size=30)
    y = backend.csr_matvec(m.row_ptr, m.col_idx, m.values, x)
    np.testing.assert_allclose(y, dense @ x, atol=1e-12)


def test_csr_matvec_empty_rows(backend):
    m = SparseSymMatrix.from_dense(np.zeros((4, 4)))
    np.testing.assert_array_equal(backend.csr_matvec(m.row_ptr, m.col_idx, m.values, np.ones(4)), np.zeros(4))

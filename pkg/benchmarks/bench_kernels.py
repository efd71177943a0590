"""Time the compiled kernels against the pure-Python fallback.

Usage: ``python benchmarks/bench_kernels.py [--repeat N]``.
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from bigap import _backend, _fallback
from bigap.graphgen import sample_bipartite
from bigap.rng import SeedSpec, derive_stream
from bigap.spectra import adjacency


def _cases(kernels):
    seed = derive_stream(SeedSpec(1, 0)).state
    a = adjacency(sample_bipartite(1000, 1000, 0.03, derive_stream(SeedSpec(1, 1))))
    x = np.random.default_rng(0).standard_normal(a.n)
    return {
        "skip_sample(1e6 cells, p=0.03)": lambda: kernels.skip_sample(seed.copy(), 1_000_000, 0.03),
        "fill_unit(100k)": lambda: kernels.fill_unit(seed.copy(), 100_000),
        f"csr_matvec(n={a.n}, nnz={len(a.values)})": lambda: kernels.csr_matvec(a.row_ptr, a.col_idx, a.values, x),
    }


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    backends = {"python": _fallback}
    if "cython" in _backend.available():
        backends["cython"] = _backend.available()["cython"]
    timings = {}
    for name, mod in backends.items():
        for label, fn in _cases(mod).items():
            timings[(label, name)] = min(timeit.repeat(fn, number=1, repeat=args.repeat))

    print(f"{'kernel':44s} {'python ms':>10s} {'cython ms':>10s} {'speedup':>8s}")
    for label in _cases(_fallback):
        py = timings[(label, "python")] * 1e3
        cy = timings.get((label, "cython"))
        if cy is None:
            print(f"{label:44s} {py:10.2f} {'n/a':>10s} {'n/a':>8s}")
        else:
            print(f"{label:44s} {py:10.2f} {cy * 1e3:10.2f} {py / (cy * 1e3):7.1f}x")


if __name__ == "__main__":
    main()

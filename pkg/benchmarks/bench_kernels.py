"""Compare the compiled kernels with the numpy fallback.

    python3 benchmarks/bench_kernels.py [--n 400] [--m 8] [--repeat 5]

Prints best-of-N wall time per kernel and for a full scale sweep, plus the
speedup of the compiled path. Both paths are checked to agree first.
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from mpca import _backend, _fallback
from mpca.core import center, pairwise_distances
from mpca.scalespace import build_grid, sweep

try:
    from mpca import _kernels
except ImportError:
    _kernels = None


def best_of(fn, repeat: int) -> float:
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=400, help="rows")
    ap.add_argument("--m", type=int, default=8, help="columns")
    ap.add_argument("--step", type=float, default=0.1, help="grid step for the sweep benchmark")
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    if _kernels is None:
        raise SystemExit("compiled extension not built; run `pip install -e . --no-build-isolation`")

    rng = np.random.default_rng(args.seed)
    X = np.ascontiguousarray(center(rng.standard_normal((args.n, args.m))).values)
    D = _fallback.pairwise_distances(X)
    Y = np.ascontiguousarray(X[:, :2])
    lo, hi = 0.2 * D.max(), 0.7 * D.max()

    np.testing.assert_allclose(_kernels.pairwise_distances(X), D, atol=1e-12)
    np.testing.assert_allclose(_kernels.masked_scatter(X, D, lo, hi)[0], _fallback.masked_scatter(X, D, lo, hi)[0],
                               rtol=1e-10, atol=1e-8)

    cases = {
        "pairwise_distances": (lambda: _kernels.pairwise_distances(X), lambda: _fallback.pairwise_distances(X)),
        "masked_scatter": (lambda: _kernels.masked_scatter(X, D, lo, hi), lambda: _fallback.masked_scatter(X, D, lo, hi)),
        "masked_pair_sums": (lambda: _kernels.masked_pair_sums(Y, D, lo, hi),
                             lambda: _fallback.masked_pair_sums(Y, D, lo, hi)),
        "count_in_range": (lambda: _kernels.count_in_range(D, lo, hi), lambda: _fallback.count_in_range(D, lo, hi)),
    }

    ds = center(X)
    dist = pairwise_distances(ds)
    grid = build_grid(dist, args.step)

    def run_sweep(impl):
        def go():
            saved = _backend._impl
            _backend._impl = impl
            try:
                sweep(ds, grid, 2, dist=dist)
            finally:
                _backend._impl = saved
        return go

    cases[f"sweep ({len(grid)} scales)"] = (run_sweep(_kernels), run_sweep(_fallback))

    print(f"n={args.n} m={args.m} repeat={args.repeat}")
    print(f"{'kernel':<24}{'cython [ms]':>14}{'numpy [ms]':>14}{'speedup':>10}")
    for name, (fast, slow) in cases.items():
        tf, ts = best_of(fast, args.repeat), best_of(slow, args.repeat)
        print(f"{name:<24}{tf * 1e3:>14.3f}{ts * 1e3:>14.3f}{ts / tf:>9.1f}x")


if __name__ == "__main__":
    main()

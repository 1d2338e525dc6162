"""Time the numba and numpy implementations of each kernel on the same inputs.

    python benchmarks/bench_backends.py [--repeat 5]

Both backends are imported from ``idim.kernels.IMPLEMENTATIONS`` in one
process, so the comparison is independent of ``IDIM_BACKEND``. The first numba
call (compilation or cache load) is excluded.
"""

import argparse
import time

import numpy as np

from idim.kernels import IMPLEMENTATIONS, split_tables


def _inputs(rng):
    n = 18
    pts = rng.normal(size=(n, 3))
    dist = np.linalg.norm(pts[:, None] - pts[None, :], axis=-1)
    thr = np.quantile(dist, [0.2, 0.5])
    bits = (1 << np.arange(n)).astype(np.uint64)
    nbr = np.array([((dist <= t) * bits).sum(axis=1) for t in thr], dtype=np.uint32)
    lo, hi = split_tables(np.full(n, 1.0 / n))
    m = 120
    q = rng.normal(size=(m, 2))
    dm = np.linalg.norm(q[:, None] - q[None, :], axis=-1)
    return {
        "subset_min_reach": (nbr, lo, hi, 0.5 - 1e-12),
        "me1_levels": (np.abs(rng.normal(size=4096)), np.full(4096, 1.0 / 4096)),
        "me1_to_constants": (rng.normal(size=200), np.full(200, 1.0 / 200)),
        "lipschitz_project": (rng.normal(scale=3.0, size=m), dm, 200, 1e-12),
    }


def _best_time(fn, args, repeat):
    best = np.inf
    for _ in range(repeat):
        t = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    inputs = _inputs(np.random.default_rng(0))
    print(f"{'kernel':<20}{'numba [ms]':>12}{'numpy [ms]':>12}{'speedup':>10}  equal")
    for name, call_args in inputs.items():
        fast, slow = IMPLEMENTATIONS["numba"][name], IMPLEMENTATIONS["numpy"][name]
        ref = fast(*call_args)
        same = np.array_equal(np.asarray(ref), np.asarray(slow(*call_args)))
        t_nb = _best_time(fast, call_args, args.repeat)
        t_np = _best_time(slow, call_args, args.repeat)
        print(f"{name:<20}{t_nb * 1e3:>12.3f}{t_np * 1e3:>12.3f}{t_np / t_nb:>10.1f}  {same}")


if __name__ == "__main__":
    main()

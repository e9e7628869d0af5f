"""Timing comparison of the compiled and numpy kernel lanes.

Runs the streaming hot path (locate + counter path + sketch updates) and
the growth-phase query path on both lanes over identical inputs, checks
that the results agree exactly, and prints a table.

Usage: python benchmarks/compare_backends.py [n_points]
"""

import sys
import time

import numpy as np

from privhp import _kernels_py

try:
    from privhp import _kernels_cy
except ImportError:
    _kernels_cy = None


def run_lane(impl, pts, L, L_star, depth, width, seeds, probe):
    t0 = time.perf_counter()
    codes = impl.locate_codes(pts, L)
    t1 = time.perf_counter()
    tree = np.zeros((1 << (L_star + 1)) - 1)
    impl.tree_path_add(tree, codes >> np.uint64(L - L_star), L_star)
    t2 = time.perf_counter()
    cells = np.zeros((depth, width))
    for l in range(L_star + 1, L + 1):
        impl.sketch_add(cells, seeds, (codes >> np.uint64(L - l)) | np.uint64(1 << l))
    t3 = time.perf_counter()
    est = impl.sketch_query(cells, seeds, probe)
    t4 = time.perf_counter()
    return (t1 - t0, t2 - t1, t3 - t2, t4 - t3), codes, tree, cells, est


def main():
    n = int(sys.argv[1]) if len(sys.argv) > 1 else 500_000
    L, L_star, depth, width = 17, 10, 17, 64
    rng = np.random.default_rng(0)
    pts = rng.random((n, 1))
    seeds = np.random.SeedSequence(1).generate_state(depth, dtype=np.uint64)
    probe = (rng.integers(0, 1 << L, 10_000).astype(np.uint64)
             | np.uint64(1 << L))

    lanes = [("numpy", _kernels_py)]
    if _kernels_cy is not None:
        lanes.append(("cython", _kernels_cy))
    else:
        print("compiled lane unavailable; timing numpy only")

    results = {}
    for name, impl in lanes:
        times, codes, tree, cells, est = run_lane(impl, pts, L, L_star,
                                                  depth, width, seeds, probe)
        results[name] = (times, codes, tree, cells, est)
        total = sum(times)
        print(f"{name:>7}: locate {times[0]:.3f}s  tree {times[1]:.3f}s  "
              f"sketch {times[2]:.3f}s  query {times[3]:.3f}s  total {total:.3f}s")

    if len(results) == 2:
        (_, c_a, t_a, s_a, e_a) = results["numpy"]
        (_, c_b, t_b, s_b, e_b) = results["cython"]
        assert np.array_equal(c_a, c_b), "locate codes differ between lanes"
        assert np.array_equal(t_a, t_b), "tree counters differ between lanes"
        assert np.array_equal(s_a, s_b), "sketch cells differ between lanes"
        assert np.array_equal(e_a, e_b), "query results differ between lanes"
        print("lane agreement: exact")
        speedup = sum(results["numpy"][0]) / sum(results["cython"][0])
        print(f"speedup (numpy/cython): {speedup:.2f}x")


if __name__ == "__main__":
    main()

"""Numpy implementations of the streaming hot loops.

This is the fallback lane; `privhp._kernels_cy` provides the same
functions compiled.  The two lanes must agree bit for bit: cell indices
come from exact power-of-two scaling, hashes are the splitmix64 mixer on
uint64 values, and accumulation order is row-major / index-order on both
sides (np.add.at applies updates sequentially), so unit-weight counts are
identical floats.
"""

from __future__ import annotations

import numpy as np

_U = np.uint64
_MIX1 = _U(0xBF58476D1CE4E5B9)
_MIX2 = _U(0x94D049BB133111EB)
_GOLDEN = _U(0x9E3779B97F4A7C15)


def splitmix64(x: np.ndarray) -> np.ndarray:
    """splitmix64 finalizer over a uint64 array (vectorized, wrapping)."""
    z = x.astype(_U, copy=True)
    z += _GOLDEN
    z = (z ^ (z >> _U(30))) * _MIX1
    z = (z ^ (z >> _U(27))) * _MIX2
    return z ^ (z >> _U(31))


def locate_codes(points: np.ndarray, level: int) -> np.ndarray:
    """Cell numbers at `level` for each row of an (n, d) coordinate array.

    Assumes coordinates already validated to [0, 1]; the round-robin cut
    order and the clamp at the closed top face mirror HypercubeDomain.locate.
    """
    points = np.ascontiguousarray(points, dtype=np.float64)
    n, d = points.shape
    codes = np.zeros(n, dtype=_U)
    one = _U(1)
    for t in range(level):
        axis = t % d
        m = t // d + 1
        cell = (points[:, axis] * 2.0**m).astype(np.int64)
        np.minimum(cell, (1 << m) - 1, out=cell)
        codes = (codes << one) | (cell.astype(_U) & one)
    return codes


def tree_path_add(tree: np.ndarray, codes: np.ndarray, L_star: int) -> None:
    """Add one unit along each root-to-level-L_star path.

    `tree` is the breadth-first array of a complete binary tree of depth
    L_star (length 2**(L_star+1) - 1); `codes` holds level-L_star cell
    numbers.
    """
    for l in range(L_star + 1):
        idx = (codes >> _U(L_star - l)).astype(np.intp) + ((1 << l) - 1)
        np.add.at(tree, idx, 1.0)


def sketch_add(cells: np.ndarray, row_seeds: np.ndarray, codes: np.ndarray,
               delta=1.0) -> None:
    """Accumulate `delta` into one cell per row for each key code."""
    width = _U(cells.shape[1])
    for r in range(cells.shape[0]):
        buckets = (splitmix64(codes ^ row_seeds[r]) % width).astype(np.intp)
        np.add.at(cells[r], buckets, delta)


def sketch_query(cells: np.ndarray, row_seeds: np.ndarray,
                 codes: np.ndarray) -> np.ndarray:
    """Minimum over rows of the hashed cells, one estimate per key code."""
    width = _U(cells.shape[1])
    est = np.empty((cells.shape[0], len(codes)))
    for r in range(cells.shape[0]):
        buckets = (splitmix64(codes ^ row_seeds[r]) % width).astype(np.intp)
        est[r] = cells[r, buckets]
    return est.min(axis=0)

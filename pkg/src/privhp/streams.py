"""Synthetic input streams for tests and benchmarks."""

from __future__ import annotations

import math

import numpy as np


def zipf_weights(n_keys: int, alpha: float) -> np.ndarray:
    """Normalized Zipf(alpha) probabilities over ranks 1..n_keys."""
    if n_keys < 1:
        raise ValueError(f"n_keys must be >= 1, got {n_keys}")
    w = np.arange(1, n_keys + 1, dtype=np.float64) ** -alpha
    return w / w.sum()


def zipf_ranks(n: int, alpha: float, n_keys: int, rng: np.random.Generator) -> np.ndarray:
    """n draws of 0-based ranks from a bounded Zipf(alpha) law."""
    return rng.choice(n_keys, size=n, p=zipf_weights(n_keys, alpha))


def zipf_points(n: int, alpha: float, n_keys: int, dimension: int,
                rng: np.random.Generator) -> np.ndarray:
    """Zipf-distributed point stream with atoms at distinct cell centers.

    Each rank maps to its own atom on a dyadic grid just fine enough to
    hold n_keys distinct cells, scattered so the heavy keys do not
    cluster in one corner.
    """
    side_bits = max(1, math.ceil(math.log2(max(n_keys, 2)) / dimension))
    side = 1 << side_bits
    flat = rng.choice(side**dimension, size=n_keys, replace=False)
    atoms = np.empty((n_keys, dimension))
    for c in range(dimension):
        atoms[:, c] = ((flat % side) + 0.5) / side
        flat //= side
    ranks = zipf_ranks(n, alpha, n_keys, rng)
    return atoms[ranks]


def uniform_points(n: int, dimension: int, rng: np.random.Generator) -> np.ndarray:
    return rng.random((n, dimension))

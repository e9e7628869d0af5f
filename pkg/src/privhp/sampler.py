"""Synthetic point generation from a partition tree.

The tree's leaves tile the domain and their counts are nonnegative, so
normalizing them gives a piecewise-uniform density.  A draw takes
u ~ Uniform[0, root count] and walks down: go left when the left child's
count is at least u, otherwise subtract it and go right; then place the
point uniformly inside the reached leaf's cell.  The walk is exactly
inverse-CDF sampling over the leaves in left-to-right order, which is
what the batched path exploits via searchsorted on the cumulative leaf
counts (property-tested against the literal walk).

Sampling reads only the tree, never the raw stream, so it spends no
additional privacy budget.
"""

from __future__ import annotations

import numpy as np

from .domain import HypercubeDomain
from .tree import PartitionNode, PartitionTree


def walk_leaf(tree: PartitionTree, u: float) -> PartitionNode:
    """Leaf reached by threading u through the counts; the literal walk."""
    node = tree.root
    while node.left is not None:
        c = node.left.count
        if c >= u:
            node = node.left
        else:
            u -= c
            node = node.right
    return node


class TreeSampler:
    """Precomputed leaf table for repeated draws from one tree."""

    def __init__(self, tree: PartitionTree):
        total = tree.root.count
        if not total > 0.0:
            raise ValueError(f"tree is a degenerate generator: root count {total!r}")
        self.tree = tree
        self.domain = HypercubeDomain(tree.dimension)
        self.leaves = tree.leaves()
        counts = np.array([leaf.count for leaf in self.leaves])
        if counts.min() < 0.0:
            raise ValueError("tree has a negative leaf count; reconcile before sampling")
        self.cum = np.cumsum(counts)
        self.total = total
        lo = np.empty((len(self.leaves), tree.dimension))
        hi = np.empty_like(lo)
        for i, leaf in enumerate(self.leaves):
            lo[i], hi[i] = self.domain.subdomain_bounds(leaf.index)
        self._lo = lo
        self._width = hi - lo

    def sample(self, m: int, rng: np.random.Generator) -> np.ndarray:
        """(m, d) array of fresh points; distributed as m independent draws."""
        if m < 0:
            raise ValueError(f"sample size must be >= 0, got {m}")
        u = rng.uniform(0.0, self.total, m)
        idx = np.searchsorted(self.cum, u, side="left")
        # float cumsum can land a hair under the root count
        np.minimum(idx, len(self.leaves) - 1, out=idx)
        return self._lo[idx] + rng.random((m, self.tree.dimension)) * self._width[idx]


def sample_one(tree: PartitionTree, rng: np.random.Generator) -> np.ndarray:
    """One synthetic point via the walk."""
    total = tree.root.count
    if not total > 0.0:
        raise ValueError(f"tree is a degenerate generator: root count {total!r}")
    leaf = walk_leaf(tree, rng.uniform(0.0, total))
    domain = HypercubeDomain(tree.dimension)
    lo, hi = domain.subdomain_bounds(leaf.index)
    lo = np.asarray(lo)
    return lo + rng.random(tree.dimension) * (np.asarray(hi) - lo)


def sample_many(tree: PartitionTree, m: int, rng: np.random.Generator) -> np.ndarray:
    """(m, d) synthetic points from the tree's piecewise-uniform density."""
    return TreeSampler(tree).sample(m, rng)

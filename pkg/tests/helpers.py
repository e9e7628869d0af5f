"""Shared test utilities: reference implementations and random generators."""

import numpy as np

from privhp.domain import ROOT
from privhp.tree import PartitionNode, PartitionTree

MASK64 = (1 << 64) - 1


def splitmix64_ref(x: int) -> int:
    """Pure-integer splitmix64 finalizer, the reference for both kernel lanes."""
    z = (x + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return (z ^ (z >> 31)) & MASK64


def random_tree(rng, dimension=1, max_depth=6, split_p=0.7,
                min_mass=50.0, max_mass=1000.0) -> PartitionTree:
    """Random consistent tree: random structure, leaf masses summed upward."""
    root = PartitionNode(ROOT, 0.0)
    stack = [root]
    while stack:
        node = stack.pop()
        force = node is root and max_depth >= 1
        if node.level < max_depth and (force or rng.random() < split_p):
            node.left = PartitionNode(node.index.child(0), 0.0)
            node.right = PartitionNode(node.index.child(1), 0.0)
            stack.append(node.left)
            stack.append(node.right)

    def fill(node):
        if node.left is None:
            node.count = float(rng.uniform(min_mass, max_mass))
        else:
            node.count = fill(node.left) + fill(node.right)
        return node.count

    fill(root)
    return PartitionTree(root=root, dimension=dimension, depth=max_depth)


def random_stream(rng, n, dimension):
    """Mixture of stream shapes: uniform, skewed atoms, sparse, clustered."""
    kind = rng.integers(0, 4)
    if kind == 0:
        return rng.random((n, dimension))
    if kind == 1:
        from privhp.streams import zipf_points
        return zipf_points(n, 1.0 + rng.random(), max(2, int(rng.integers(2, 64))),
                           dimension, rng)
    if kind == 2:
        atom = rng.random(dimension)
        return np.tile(atom, (n, 1))
    center = rng.random(dimension) * 0.8 + 0.1
    return np.clip(center + rng.normal(0, 0.05, (n, dimension)), 0.0, 1.0)


def tree_as_dict(tree: PartitionTree) -> dict:
    return {node.index.bits: node.count for node in tree.nodes()}

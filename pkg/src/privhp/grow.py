"""Growing a pruned partition tree from noisy level estimates.

The stream summary holds exact-noisy counters for the complete tree down
to level L_star and one count-min sketch per deeper level.  Growth works
top-down:

1. The complete region is made consistent level by level.
2. Every level-L_star node becomes a growth candidate.
3. For each deeper level, the children of all candidates are looked up
   (sketch queries, or an injected exact source), each parent's pair is
   reconciled with the parent's count, and — except at the final level —
   the k children with the largest counts survive as the next frontier;
   the rest stay in the tree as pruned leaves.

Reconciling a pair (c0, c1) against a parent p means removing the signed
surplus Lambda = c0 + c1 - p.  Splitting it evenly preserves the
difference c0 - c1, which is the part of the pair that carries signal;
if an even split would push a child negative, the smaller child is
zeroed and the larger inherits the whole parent count.  Children are
clamped to be nonnegative first.  Either way the pair afterwards is
nonnegative and sums exactly to the parent.

The even split leaves each child with the same residual error of
magnitude |(lambda0 - lambda1 + e0 - e1)| / 2, where lambda_i is the
counter noise and e_i the sketch overcount of child i; `consistency_error`
computes that residual from before/truth pairs for instrumentation.
"""

from __future__ import annotations

import numpy as np

from .domain import ROOT, SubdomainIndex
from .tree import PartitionNode, PartitionTree


def apply_consistency(parent: float, c0: float, c1: float) -> tuple[float, float]:
    """Reconciled (c0, c1) for a parent count; pure function of the triple.

    Raises ValueError if the parent count is negative — parents are
    reconciled before their children, so a negative parent is a contract
    violation, not data.
    """
    if parent < 0.0:
        raise ValueError(f"parent count must be >= 0, got {parent}")
    c0 = max(c0, 0.0)
    c1 = max(c1, 0.0)
    lam = c0 + c1 - parent
    t0 = c0 - 0.5 * lam
    t1 = c1 - 0.5 * lam
    if t0 < 0.0 or t1 < 0.0:
        # Even split would go negative: zero the smaller child (ties zero
        # child 0) and hand the full parent count to the other.
        if c1 < c0:
            return parent, 0.0
        return 0.0, parent
    # Rewriting t1 as parent - t0 makes the pair sum exact in floats.
    t1 = parent - t0
    if t1 < 0.0:
        return parent, 0.0
    return t0, t1


def _consistency_level(parent, c0, c1):
    """Vectorized apply_consistency over aligned arrays.

    Operation-for-operation the same arithmetic as the scalar version, so
    the two agree exactly (property-tested).
    """
    c0 = np.maximum(c0, 0.0)
    c1 = np.maximum(c1, 0.0)
    lam = c0 + c1 - parent
    t0 = c0 - 0.5 * lam
    t1 = c1 - 0.5 * lam
    bad = (t0 < 0.0) | (t1 < 0.0)
    a0 = np.where(bad, np.where(c1 < c0, parent, 0.0), t0)
    a1 = parent - a0
    neg = a1 < 0.0
    a0 = np.where(neg, parent, a0)
    a1 = np.where(neg, 0.0, a1)
    return a0, a1


def enforce_consistency(node: PartitionNode) -> None:
    """Reconcile node's children with node.count, in place."""
    if node.left is None or node.right is None:
        raise ValueError(f"node {node.index.bits!r} has no child pair to reconcile")
    node.left.count, node.right.count = apply_consistency(
        node.count, node.left.count, node.right.count
    )


def consistency_error(before0: float, before1: float,
                      true0: float, true1: float) -> float:
    """Residual per-child error left by an even-split reconciliation."""
    return abs(((before0 - true0) - (before1 - true1)) / 2.0)


def grow_from_counts(tree_counts: np.ndarray, dimension: int, L_star: int,
                     L: int, k: int, count_source, meta: dict | None = None
                     ) -> PartitionTree:
    """Build the pruned tree from a complete-counter array plus a deep source.

    `tree_counts` is the breadth-first counter array for levels 0..L_star
    (it is not modified); `count_source(level, thetas)` returns estimated
    counts for an array of level-`level` cell numbers.  Top-k selection
    applies at levels L_star+1 .. L-1; the final level is attached to the
    surviving frontier without further selection.  Ties in the selection
    go to the lexicographically smaller index.
    """
    counts = np.array(tree_counts, dtype=np.float64, copy=True)
    if len(counts) != (1 << (L_star + 1)) - 1:
        raise ValueError(
            f"counter array has {len(counts)} entries, expected {(1 << (L_star + 1)) - 1}"
        )
    counts[0] = max(counts[0], 0.0)
    for l in range(L_star):
        base = (1 << (l + 1)) - 1
        kids = counts[base : base + (1 << (l + 1))]
        a0, a1 = _consistency_level(counts[(1 << l) - 1 : base], kids[0::2], kids[1::2])
        kids[0::2] = a0
        kids[1::2] = a1

    root = PartitionNode(ROOT, counts[0])
    frontier = [root]
    for l in range(L_star):
        base = (1 << (l + 1)) - 1
        nxt = []
        for node in frontier:
            v = node.index.as_int()
            node.left = PartitionNode(node.index.child(0), counts[base + 2 * v])
            node.right = PartitionNode(node.index.child(1), counts[base + 2 * v + 1])
            nxt.append(node.left)
            nxt.append(node.right)
        frontier = nxt

    hot = frontier  # every level-L_star node starts as a candidate
    for child_level in range(L_star + 1, L + 1):
        thetas = np.empty(2 * len(hot), dtype=np.uint64)
        for i, node in enumerate(hot):
            v = node.index.as_int()
            thetas[2 * i] = 2 * v
            thetas[2 * i + 1] = 2 * v + 1
        estimates = np.asarray(count_source(child_level, thetas), dtype=np.float64)
        children = []
        for i, node in enumerate(hot):
            node.left = PartitionNode(node.index.child(0), float(estimates[2 * i]))
            node.right = PartitionNode(node.index.child(1), float(estimates[2 * i + 1]))
            enforce_consistency(node)
            children.append(node.left)
            children.append(node.right)
        if child_level < L:
            children.sort(key=lambda nd: (-nd.count, nd.index.bits))
            hot = children[:k]

    return PartitionTree(root=root, dimension=dimension, depth=L, meta=dict(meta or {}))


def grow_partition(state, count_source=None) -> PartitionTree:
    """Grow the output tree of a finished stream summary.

    `count_source` overrides the sketch lookups (used by exact oracles);
    by default deep counts come from the state's per-level sketches.
    """
    cfg = state.config
    if count_source is None:
        def count_source(level, thetas):
            codes = np.asarray(thetas, dtype=np.uint64) | np.uint64(1 << level)
            return state.sketches[level].query(codes)

    meta = {
        "epsilon": cfg.epsilon, "k": cfg.k, "L_star": cfg.L_star, "j": cfg.j,
        "w_cells": cfg.w_cells, "seed": cfg.seed, "n_hint": cfg.n_hint,
    }
    return grow_from_counts(state.tree_counts, cfg.dimension, cfg.L_star,
                            cfg.L, cfg.k, count_source, meta)


def tree_total_and_levels(tree: PartitionTree):
    """(root count, {level: [(bits, count)] lex-sorted}) for reporting/diffs.

    On a consistent tree every level's list sums to the root count, which
    is the total mass the generator will distribute.
    """
    levels: dict[int, list[tuple[str, float]]] = {}
    for node in tree.nodes():
        levels.setdefault(node.level, []).append((node.index.bits, node.count))
    for entries in levels.values():
        entries.sort()
    return tree.root.count, levels

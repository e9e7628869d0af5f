"""Utility evaluation: exact baselines and 1-Wasserstein distances.

Three distributions matter when judging a private tree: the empirical
measure of the stream, the tree grown with exact counts and exact top-k
pruning (what pruning alone costs), and the private tree itself.  This
module builds the exact baselines from a materialized point set and
measures W1 between any of the players.

For d == 1 every W1 here is computed exactly as the integral of a CDF
difference — empirical CDFs are step functions and a tree's CDF is
piecewise linear, so the integrand is piecewise linear and integrates in
closed form.  For d >= 2 both measures are first collapsed onto the
level-r cells of the domain and W1 between the weighted cell centers is
solved as a transportation LP under the l-infinity ground metric; the
collapse moves no mass farther than the cell diameter, so the LP value
is exact up to that resolution (callers should report gamma_r alongside).
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np
from scipy import optimize, sparse

from . import backend
from .domain import HypercubeDomain, SubdomainIndex
from .grow import grow_from_counts
from .tree import PartitionTree


class ExactHistogram:
    """Exact cell counts of a point set at every level 0..depth."""

    def __init__(self, points, depth: int, dimension: int | None = None):
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
        if pts.shape[0] and (pts.min() < 0.0 or pts.max() > 1.0):
            raise ValueError("points must lie in [0,1]^d")
        if dimension is None:
            dimension = pts.shape[1]
        if depth < 0 or depth > 26:
            raise ValueError(f"depth {depth} out of supported range [0, 26]")
        self.dimension = dimension
        self.depth = depth
        self.n = pts.shape[0]
        codes = backend.locate_codes(pts, depth).astype(np.int64)
        level = np.bincount(codes, minlength=1 << depth).astype(np.float64)
        self.levels = [None] * (depth + 1)
        self.levels[depth] = level
        for l in range(depth - 1, -1, -1):
            level = level[0::2] + level[1::2]
            self.levels[l] = level

    def level_counts(self, level: int) -> np.ndarray:
        return self.levels[level]

    def count_source(self, level: int, thetas) -> np.ndarray:
        """Exact lookups with the signature grow_from_counts expects."""
        return self.levels[level][np.asarray(thetas, dtype=np.int64)]

    def tree_counts(self, L_star: int) -> np.ndarray:
        """Breadth-first counter array for levels 0..L_star."""
        return np.concatenate([self.levels[l] for l in range(L_star + 1)])

    def tail_norm(self, level: int, k: int) -> float:
        """Mass outside the k heaviest level-`level` cells."""
        c = self.levels[level]
        if k >= len(c):
            return 0.0
        part = np.partition(c, len(c) - k)
        return float(c.sum() - part[len(c) - k:].sum())


def exact_prune_tree(points_or_hist, k: int, L_star: int, L: int,
                     dimension: int | None = None) -> PartitionTree:
    """Tree grown from exact counts with exact top-k pruning.

    Same growth procedure as the private path — all level-L_star nodes
    branch, global top-k among each level's children, final level
    attached without selection — but counts are true cell counts, so
    consistency never has anything to repair.
    """
    hist = points_or_hist if isinstance(points_or_hist, ExactHistogram) \
        else ExactHistogram(points_or_hist, L, dimension)
    if hist.depth < L:
        raise ValueError(f"histogram depth {hist.depth} is shallower than L={L}")
    return grow_from_counts(hist.tree_counts(L_star), hist.dimension, L_star, L, k,
                            hist.count_source, meta={"k": k, "L_star": L_star})


def _leaf_cdf_knots(tree: PartitionTree):
    domain = HypercubeDomain(1)
    leaves = tree.leaves()
    counts = np.array([leaf.count for leaf in leaves])
    if counts.min() < 0.0:
        raise ValueError("tree has negative leaf counts")
    total = counts.sum()
    if not total > 0.0:
        raise ValueError("tree carries no mass")
    edges = np.empty(len(leaves) + 1)
    edges[0] = 0.0
    for i, leaf in enumerate(leaves):
        edges[i + 1] = domain.subdomain_bounds(leaf.index)[1][0]
    return edges, np.concatenate([[0.0], np.cumsum(counts) / total])


def w1_exact_1d(a, b) -> float:
    """W1 between two 1-d sample sets: integral of |F_a - F_b|."""
    a = np.sort(np.asarray(a, dtype=np.float64).ravel())
    b = np.sort(np.asarray(b, dtype=np.float64).ravel())
    if len(a) == 0 or len(b) == 0:
        raise ValueError("both sample sets must be nonempty")
    xs = np.unique(np.concatenate([a, b]))
    if len(xs) == 1:
        return 0.0
    Fa = np.searchsorted(a, xs[:-1], side="right") / len(a)
    Fb = np.searchsorted(b, xs[:-1], side="right") / len(b)
    return float(np.sum(np.abs(Fa - Fb) * np.diff(xs)))


def w1_points_tree_1d(points, tree: PartitionTree) -> float:
    """Exact W1 between an empirical measure and a tree's density (d == 1)."""
    if tree.dimension != 1:
        raise ValueError(f"exact CDF integration needs d == 1, tree has d={tree.dimension}")
    x = np.sort(np.asarray(points, dtype=np.float64).ravel())
    if len(x) == 0:
        raise ValueError("empty point set")
    if x[0] < 0.0 or x[-1] > 1.0:
        raise ValueError("points must lie in [0,1]")
    edges, cum = _leaf_cdf_knots(tree)
    ys = np.unique(np.concatenate([edges, x]))
    Ft = np.interp(ys, edges, cum)
    Fe = np.searchsorted(x, ys[:-1], side="right") / len(x)
    e0 = Ft[:-1] - Fe
    e1 = Ft[1:] - Fe
    h = np.diff(ys)
    same = e0 * e1 >= 0.0
    denom = np.abs(e0) + np.abs(e1)
    cross = np.divide(e0 * e0 + e1 * e1, 2.0 * denom,
                      out=np.zeros_like(denom), where=denom > 0.0)
    seg = np.where(same, 0.5 * (np.abs(e0) + np.abs(e1)), cross)
    return float(np.sum(seg * h))


def w1_trees_1d(tree_a: PartitionTree, tree_b: PartitionTree) -> float:
    """Exact W1 between two trees' densities (d == 1)."""
    edges_a, cum_a = _leaf_cdf_knots(tree_a)
    edges_b, cum_b = _leaf_cdf_knots(tree_b)
    ys = np.unique(np.concatenate([edges_a, edges_b]))
    Fa = np.interp(ys, edges_a, cum_a)
    Fb = np.interp(ys, edges_b, cum_b)
    e0 = (Fa - Fb)[:-1]
    e1 = (Fa - Fb)[1:]
    h = np.diff(ys)
    same = e0 * e1 >= 0.0
    denom = np.abs(e0) + np.abs(e1)
    cross = np.divide(e0 * e0 + e1 * e1, 2.0 * denom,
                      out=np.zeros_like(denom), where=denom > 0.0)
    seg = np.where(same, 0.5 * (np.abs(e0) + np.abs(e1)), cross)
    return float(np.sum(seg * h))


def points_cell_measure(points, dimension: int, level: int):
    """(thetas, weights) of the empirical measure collapsed to level-`level` cells."""
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    codes = backend.locate_codes(pts, level).astype(np.int64)
    thetas, counts = np.unique(codes, return_counts=True)
    return thetas, counts / len(pts)


def tree_cell_measure(tree: PartitionTree, level: int):
    """(thetas, weights) of a tree's density collapsed to level-`level` cells.

    Leaves below the target level contribute to their ancestor cell;
    leaves above it spread uniformly over their descendants.
    """
    total = tree.root.count
    if not total > 0.0:
        raise ValueError("tree carries no mass")
    acc: dict[int, float] = {}
    for leaf in tree.leaves():
        if leaf.count == 0.0:
            continue
        v = leaf.index.as_int()
        l = leaf.level
        if l >= level:
            theta = v >> (l - level)
            acc[theta] = acc.get(theta, 0.0) + leaf.count
        else:
            span = 1 << (level - l)
            share = leaf.count / span
            base = v << (level - l)
            for t in range(base, base + span):
                acc[t] = acc.get(t, 0.0) + share
    thetas = np.array(sorted(acc), dtype=np.int64)
    weights = np.array([acc[t] for t in thetas]) / total
    return thetas, weights


def _cell_centers(thetas, dimension: int, level: int) -> np.ndarray:
    domain = HypercubeDomain(dimension)
    centers = np.empty((len(thetas), dimension))
    for i, t in enumerate(thetas):
        lo, hi = domain.subdomain_bounds(SubdomainIndex.from_int(level, int(t)))
        centers[i] = 0.5 * (np.asarray(lo) + np.asarray(hi))
    return centers


MAX_FLOW_VARIABLES = 4_000_000


def w1_leaf_flow(mu, nu, dimension: int, level: int) -> float:
    """W1 between two cell measures via the transportation LP.

    `mu` and `nu` are (thetas, weights) pairs over level-`level` cells;
    weights are normalized here.  Ground metric is l-infinity between
    cell centers.  Cost matrices beyond MAX_FLOW_VARIABLES entries are
    refused — evaluate at a coarser level instead.
    """
    mu_t, mu_w = mu
    nu_t, nu_w = nu
    mu_w = np.asarray(mu_w, dtype=np.float64)
    nu_w = np.asarray(nu_w, dtype=np.float64)
    if mu_w.min() < 0.0 or nu_w.min() < 0.0:
        raise ValueError("cell weights must be nonnegative")
    if not (mu_w.sum() > 0.0 and nu_w.sum() > 0.0):
        raise ValueError("cell measures must carry mass")
    mu_w = mu_w / mu_w.sum()
    nu_w = nu_w / nu_w.sum()
    n, m = len(mu_w), len(nu_w)
    if n * m > MAX_FLOW_VARIABLES:
        raise ValueError(
            f"transport problem with {n}x{m} cells is too large; evaluate at a coarser level"
        )
    ca = _cell_centers(mu_t, dimension, level)
    cb = _cell_centers(nu_t, dimension, level)
    cost = np.abs(ca[:, None, :] - cb[None, :, :]).max(axis=2)

    # flow conservation: rows sum to mu, columns to nu (last row dropped
    # as redundant to keep the system full rank)
    rows = []
    for i in range(n):
        idx = np.arange(i * m, (i + 1) * m)
        rows.append(sparse.csr_matrix((np.ones(m), (np.zeros(m), idx)), shape=(1, n * m)))
    for jcol in range(m - 1):
        idx = jcol + m * np.arange(n)
        rows.append(sparse.csr_matrix((np.ones(n), (np.zeros(n), idx)), shape=(1, n * m)))
    A = sparse.vstack(rows, format="csr")
    rhs = np.concatenate([mu_w, nu_w[:-1]])
    res = optimize.linprog(cost.ravel(), A_eq=A, b_eq=rhs,
                           bounds=(0, None), method="highs")
    if not res.success:
        raise RuntimeError(f"transport LP failed: {res.message}")
    return float(res.fun)


def pruning_bound_1d(points, k: int, L_star: int, L: int):
    """(lhs, rhs) of the exact-pruning utility guarantee for a 1-d stream.

    lhs is W1 between the empirical measure and the exact-pruned tree;
    rhs is (||tail_k^L||_1 / n) * sum of cell diameters over the pruned
    levels, plus gamma_L for the within-cell discretization of the
    deepest level.
    """
    hist = ExactHistogram(points, L, dimension=1)
    tree = exact_prune_tree(hist, k, L_star, L)
    lhs = w1_points_tree_1d(points, tree)
    geometry = HypercubeDomain(1).geometry(L)
    tail = hist.tail_norm(L, k)
    rhs = (tail / hist.n) * sum(geometry.gamma[l] for l in range(L_star + 1, L)) \
        + geometry.gamma[L]
    return lhs, rhs


@dataclass
class UtilityReport:
    """Evaluation result with the configuration that produced it."""

    w1: float
    w1_method: str
    tail_norm: float
    memory_cells: int
    epsilon: float | None
    k: int | None
    L: int
    L_star: int | None
    j: int | None
    trials: int
    mean: float
    stderr: float
    seed: int | None

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "UtilityReport":
        return cls(**json.loads(text))


def summarize_trials(values) -> tuple[float, float]:
    """(mean, standard error) of a batch of trial results."""
    v = np.asarray(values, dtype=np.float64)
    if len(v) == 0:
        raise ValueError("no trial values")
    if len(v) == 1:
        return float(v[0]), 0.0
    return float(v.mean()), float(v.std(ddof=1) / np.sqrt(len(v)))

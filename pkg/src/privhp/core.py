"""One-pass private summaries of point streams over [0,1]^d.

A summary holds Laplace-perturbed counters for the complete partition
tree down to level L_star plus one count-min sketch per level
L_star+1..L.  All noise is drawn up front (counter noise directly, cell
noise inside each sketch), so processing an element is pure counting:
locate its level-L cell once, add 1 along the counter path, and add 1 to
each deeper sketch under the element's cell at that level.  Memory is
fixed at (2**(L_star+1) - 1) + (L - L_star) * j * w_cells float cells no
matter how long the stream runs.

Per element the counters absorb L_star + 1 unit writes and each sketch j
of them, so with the per-level budget split summing to epsilon, the whole
summary is epsilon-differentially private by sequential composition, and
everything derived from it afterwards (growth, sampling) is free.

`noiseless=True` zeroes every noise draw.  That breaks the privacy
guarantee — it exists for oracle tests and calibration only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import backend
from .domain import HypercubeDomain
from .grow import grow_partition
from .noise import allocate_budget, sample_laplace
from .sketch import PrivateSketch
from .tree import PartitionTree

MAX_LEVEL = 40  # locate arithmetic is exact well past this; keys must fit uint64


@dataclass(frozen=True)
class PrivHpConfig:
    dimension: int
    epsilon: float
    k: int
    L: int
    L_star: int
    j: int
    w_cells: int
    seed: int = 0
    n_hint: int | None = None
    noiseless: bool = False

    def __post_init__(self):
        if self.dimension < 1:
            raise ValueError(f"dimension must be >= 1, got {self.dimension}")
        if not self.epsilon > 0.0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if not 0 <= self.L_star <= self.L <= MAX_LEVEL:
            raise ValueError(
                f"need 0 <= L_star <= L <= {MAX_LEVEL}, got L_star={self.L_star}, L={self.L}"
            )
        if self.j < 1:
            raise ValueError(f"j must be >= 1, got {self.j}")
        if self.w_cells < 1:
            raise ValueError(f"w_cells must be >= 1, got {self.w_cells}")


def default_config(n_hint: int, epsilon: float, k: int, dimension: int = 1,
                   seed: int = 0, noiseless: bool = False) -> PrivHpConfig:
    """Shape parameters tuned to an expected stream length.

    Depth L targets resolution 1/(epsilon * n); the counter region covers
    about k * log(n)^2 nodes so the sketches only ever see the pruned
    frontier; sketch depth j gives ~1/n collision failure odds; width is
    twice the pruning budget.  Raises ValueError when epsilon * n_hint < 2,
    where even the root is noise.
    """
    if n_hint < 2:
        raise ValueError(f"n_hint must be >= 2, got {n_hint}")
    if not epsilon > 0.0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if epsilon * n_hint < 2.0:
        raise ValueError(
            f"epsilon * n_hint = {epsilon * n_hint:g} < 2: too little signal for any hierarchy"
        )
    j = max(1, math.ceil(math.log2(n_hint)))
    L = max(1, math.ceil(math.log2(epsilon * n_hint)))
    L_star = min(L, math.ceil(math.log2(k * math.log2(n_hint) ** 2)))
    L_star = max(0, L_star)
    return PrivHpConfig(dimension=dimension, epsilon=epsilon, k=k, L=L,
                        L_star=L_star, j=j, w_cells=2 * k, seed=seed,
                        n_hint=n_hint, noiseless=noiseless)


class PrivHpState:
    """Streaming summary; feed points with update(), then finalize() once."""

    def __init__(self, config: PrivHpConfig):
        self.config = config
        self.domain = HypercubeDomain(config.dimension)
        geometry = self.domain.geometry(config.L)
        self.plan = allocate_budget(config.epsilon, config.L_star, config.L,
                                    config.j, config.k, geometry)
        n_sketches = config.L - config.L_star
        ss = np.random.SeedSequence(config.seed)
        seeds = ss.spawn(1 + n_sketches)
        rng = np.random.Generator(np.random.PCG64(seeds[0]))

        self.tree_counts = np.zeros((1 << (config.L_star + 1)) - 1)
        if not config.noiseless:
            for l in range(config.L_star + 1):
                lo = (1 << l) - 1
                self.tree_counts[lo : lo + (1 << l)] = sample_laplace(
                    self.plan.counter_scale(l), rng, 1 << l
                )
        self.sketches = {}
        for i, l in enumerate(range(config.L_star + 1, config.L + 1)):
            scale = 0.0 if config.noiseless else self.plan.sketch_scale(l)
            self.sketches[l] = PrivateSketch(config.j, config.w_cells, scale, seeds[1 + i])

        self.items_seen = 0
        self.rejected = 0
        self.counter_writes = 0
        self.sketch_writes = 0
        self.finalized = False

    def memory_cells(self) -> int:
        """Float cells held, a constant of the configuration."""
        cfg = self.config
        return ((1 << (cfg.L_star + 1)) - 1) + (cfg.L - cfg.L_star) * cfg.j * cfg.w_cells

    def update(self, point) -> bool:
        """Absorb one point; returns False (and counts it) if out of domain."""
        return self.update_batch(np.atleast_2d(np.asarray(point, dtype=np.float64))) == 1

    def update_batch(self, points) -> int:
        """Absorb an (n, d) block of points; returns how many were in-domain."""
        if self.finalized:
            raise RuntimeError("summary is finalized; no further updates")
        pts = np.ascontiguousarray(points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] != self.config.dimension:
            raise ValueError(
                f"expected (n, {self.config.dimension}) points, got shape {pts.shape}"
            )
        ok = np.all((pts >= 0.0) & (pts <= 1.0), axis=1)
        n_ok = int(ok.sum())
        self.rejected += len(pts) - n_ok
        if n_ok == 0:
            return 0
        pts = pts[ok] if n_ok < len(pts) else pts
        cfg = self.config
        codes_L = backend.locate_codes(pts, cfg.L)
        backend.tree_path_add(self.tree_counts, codes_L >> np.uint64(cfg.L - cfg.L_star),
                              cfg.L_star)
        for l in range(cfg.L_star + 1, cfg.L + 1):
            codes = (codes_L >> np.uint64(cfg.L - l)) | np.uint64(1 << l)
            self.sketches[l].update(codes)
        self.items_seen += n_ok
        self.counter_writes += n_ok * (cfg.L_star + 1)
        self.sketch_writes += n_ok * (cfg.L - cfg.L_star) * cfg.j
        return n_ok

    def finalize(self) -> PartitionTree:
        """Seal the summary and grow the output tree; callable once."""
        if self.finalized:
            raise RuntimeError("summary is already finalized")
        for sk in self.sketches.values():
            sk.seal()
        tree = grow_partition(self)
        self.finalized = True
        return tree


def init(config: PrivHpConfig) -> PrivHpState:
    """Fresh summary for the given configuration (draws all noise now)."""
    return PrivHpState(config)

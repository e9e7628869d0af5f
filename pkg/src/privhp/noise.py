"""Laplace noise and the per-level privacy budget split.

The total budget epsilon is divided across tree levels 0..L so that the
expected weighted error contribution of each level is balanced.  Counter
levels (l <= L_star) get a share proportional to sqrt(Gamma[l-1]); sketch
levels get sqrt(j * k * gamma[l-1]).  With sigma_l denoting level l's
share, a counter at level l is perturbed with Laplace(1/sigma_l) noise
and a sketch cell at level l with Laplace(j/sigma_l) (each stream element
touches j cells of that sketch, so the sensitivity is j).  The shares sum
to epsilon, which is what the sequential composition argument consumes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .domain import LevelGeometry


@dataclass(frozen=True)
class LaplaceScale:
    """Scale parameter b of a Laplace(b) distribution."""

    scale: float

    def __post_init__(self):
        if not (math.isfinite(self.scale) and self.scale > 0.0):
            raise ValueError(f"Laplace scale must be finite and positive, got {self.scale}")


def laplace_from_uniform(u, scale: float):
    """Map uniforms in [-1/2, 1/2) through the Laplace inverse CDF.

    sign(0) == 0, so u == 0 maps to exactly 0.  Works on scalars and
    arrays alike.
    """
    u = np.asarray(u, dtype=np.float64)
    mag = 1.0 - 2.0 * np.abs(u)
    # u == -1/2 would hit log(0); nudge to the smallest positive float.
    mag = np.maximum(mag, np.finfo(np.float64).tiny)
    out = -scale * np.sign(u) * np.log(mag)
    return out if out.ndim else float(out)


def sample_laplace(scale, rng: np.random.Generator, size=None):
    """Draw Laplace(scale) variates; scale 0 is the degenerate point mass at 0."""
    if isinstance(scale, LaplaceScale):
        b = scale.scale
    else:
        b = float(scale)
        if not (math.isfinite(b) and b >= 0.0):
            raise ValueError(f"Laplace scale must be finite and >= 0, got {scale}")
    if b == 0.0:
        return 0.0 if size is None else np.zeros(size)
    return laplace_from_uniform(rng.random(size) - 0.5, b)


@dataclass(frozen=True)
class BudgetPlan:
    """Budget shares sigma_0..sigma_L and the shape they were derived for."""

    epsilon: float
    sigmas: tuple[float, ...]
    L_star: int
    L: int
    j: int
    k: int

    def counter_scale(self, level: int) -> float:
        """Laplace scale for a level-`level` tree counter (sensitivity 1)."""
        if not 0 <= level <= self.L_star:
            raise ValueError(f"level {level} is not a counter level (L_star={self.L_star})")
        return 1.0 / self.sigmas[level]

    def sketch_scale(self, level: int) -> float:
        """Laplace scale for a cell of the level-`level` sketch (sensitivity j)."""
        if not self.L_star < level <= self.L:
            raise ValueError(f"level {level} is not a sketch level (L_star={self.L_star}, L={self.L})")
        return self.j / self.sigmas[level]


def allocate_budget(epsilon: float, L_star: int, L: int, j: int, k: int,
                    geometry: LevelGeometry) -> BudgetPlan:
    """Split epsilon across levels 0..L.

    L_star == L is allowed and means no sketch levels (a pure counter
    hierarchy).  Raises ValueError on a shape that admits no positive
    split.
    """
    if not epsilon > 0.0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    if not 0 <= L_star <= L:
        raise ValueError(f"need 0 <= L_star <= L, got L_star={L_star}, L={L}")
    if j < 1 or k < 1:
        raise ValueError(f"j and k must be >= 1, got j={j}, k={k}")
    if len(geometry.gamma) < L + 1:
        raise ValueError(f"geometry covers {len(geometry.gamma)} levels, need {L + 1}")

    weights = []
    for l in range(L + 1):
        if l <= L_star:
            weights.append(math.sqrt(geometry.Gamma_prev(l)))
        else:
            weights.append(math.sqrt(j * k * geometry.gamma[l - 1]))
    total = sum(weights)
    if not (math.isfinite(total) and total > 0.0):
        raise ValueError(f"degenerate geometry: level weights sum to {total}")

    sigmas = tuple(epsilon * w / total for w in weights)
    return BudgetPlan(epsilon=epsilon, sigmas=sigmas, L_star=L_star, L=L, j=j, k=k)

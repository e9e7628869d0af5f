"""Count-min sketch with Laplace-initialized cells.

A sketch of depth j and width w_cells holds j rows of w_cells float
counters.  Every key is hashed to one cell per row (splitmix64 of the
key code XOR a per-row seed); an update adds its weight to those j
cells, a query takes the minimum over the rows.  Because each stream
element touches exactly j cells, the sketch's L1 sensitivity to one
element is j, and privacy comes from initializing every cell with
Laplace(j/sigma) noise before the stream starts rather than from
per-update noise.

Collisions only ever add mass, so in the noiseless setting a query never
underestimates, and for a key outside the heavy hitters the expected
overestimate is governed by the tail mass: with width 2w, depth j and a
key vector v,  E[min-row error] <= (||tail_w(v)||_1 + 2**(1-j) ||v||_1) / w,
where tail_w zeroes the w largest entries.

Queries are only meaningful once the stream has been consumed, so the
sketch is sealed first; updating a sealed sketch or querying an unsealed
one is a state error.
"""

from __future__ import annotations

import numpy as np

from . import backend
from .domain import SubdomainIndex, key_code
from .noise import sample_laplace


def _as_codes(keys) -> np.ndarray:
    if isinstance(keys, SubdomainIndex):
        return np.array([key_code(keys)], dtype=np.uint64)
    if isinstance(keys, (int, np.integer)):
        return np.array([keys], dtype=np.uint64)
    return np.ascontiguousarray(keys, dtype=np.uint64)


class PrivateSketch:
    """j x w_cells count-min table with noisy initialization.

    `noise_scale` is the Laplace scale for each cell (0 means noiseless,
    which is NOT private); `seed` drives both the row hash seeds and the
    initialization noise, independently.
    """

    def __init__(self, depth: int, width: int, noise_scale: float, seed):
        if depth < 1:
            raise ValueError(f"sketch depth must be >= 1, got {depth}")
        if width < 1:
            raise ValueError(f"sketch width must be >= 1, got {width}")
        if not noise_scale >= 0.0:
            raise ValueError(f"noise scale must be >= 0, got {noise_scale}")
        self.depth = int(depth)
        self.width = int(width)
        self.noise_scale = float(noise_scale)
        ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
        ss_hash, ss_noise = ss.spawn(2)
        self.row_seeds = ss_hash.generate_state(self.depth, dtype=np.uint64)
        rng = np.random.Generator(np.random.PCG64(ss_noise))
        if noise_scale == 0.0:
            self.cells = np.zeros((self.depth, self.width))
        else:
            self.cells = np.asarray(sample_laplace(noise_scale, rng, (self.depth, self.width)))
        self._sealed = False
        self.updates = 0  # stream elements absorbed, for instrumentation

    def memory_cells(self) -> int:
        return self.depth * self.width

    def seal(self) -> None:
        """End the update phase; queries become legal."""
        self._sealed = True

    def update(self, keys, delta=1.0) -> None:
        """Add `delta` to the j cells of each key.

        `keys` may be one SubdomainIndex, one packed key code, or an array
        of codes; `delta` a scalar or a per-key array.
        """
        if self._sealed:
            raise RuntimeError("sketch is sealed; no further updates")
        codes = _as_codes(keys)
        backend.sketch_add(self.cells, self.row_seeds, codes, delta)
        self.updates += len(codes)

    def query(self, keys):
        """Min-over-rows estimate for each key; scalar in, scalar out."""
        if not self._sealed:
            raise RuntimeError("sketch must be sealed before querying")
        codes = _as_codes(keys)
        est = backend.sketch_query(self.cells, self.row_seeds, codes)
        if isinstance(keys, (SubdomainIndex, int, np.integer)):
            return float(est[0])
        return est

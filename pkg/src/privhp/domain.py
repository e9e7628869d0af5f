"""Dyadic decomposition of the unit hypercube.

The domain [0,1]^d is split recursively, one coordinate at a time in
round-robin order: the cut at tree level l+1 halves coordinate (l mod d).
A subdomain is addressed by the bit string of cut outcomes from the root,
bit 0 meaning the lower half.  Cells are half-open (lower face closed,
upper face open) except on the boundary of the cube, where the top face
at 1.0 is closed so that every point of [0,1]^d lands in exactly one cell
per level.

Under the l-infinity norm the diameter of a level-l cell is 2**-(l // d):
the widest axis is the one cut least often.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True, slots=True)
class SubdomainIndex:
    """Address of a dyadic cell: the cut outcomes on the path from the root."""

    bits: str

    def __post_init__(self):
        if any(b not in "01" for b in self.bits):
            raise ValueError(f"index bits must be 0/1, got {self.bits!r}")

    @property
    def level(self) -> int:
        return len(self.bits)

    def child(self, bit: int) -> "SubdomainIndex":
        if bit not in (0, 1):
            raise ValueError(f"child bit must be 0 or 1, got {bit}")
        return SubdomainIndex(self.bits + str(bit))

    def parent(self) -> "SubdomainIndex":
        if not self.bits:
            raise ValueError("root has no parent")
        return SubdomainIndex(self.bits[:-1])

    def as_int(self) -> int:
        """Position among the 2**level cells of this level, in bit order."""
        return int(self.bits, 2) if self.bits else 0

    @classmethod
    def from_int(cls, level: int, value: int) -> "SubdomainIndex":
        if level < 0:
            raise ValueError(f"level must be >= 0, got {level}")
        if not 0 <= value < (1 << level):
            raise ValueError(f"value {value} out of range for level {level}")
        return cls(format(value, f"0{level}b") if level else "")


ROOT = SubdomainIndex("")


@dataclass(frozen=True)
class LevelGeometry:
    """Per-level cell diameters and their level totals.

    gamma[l] is the l-infinity diameter of one level-l cell, Gamma[l] the
    number of level-l cells times gamma[l].  Gamma_prev(0) is defined as
    Gamma[0] so budget formulas can refer to "the level above the root".
    """

    gamma: tuple[float, ...]
    Gamma: tuple[float, ...]

    def gamma_prev(self, level: int) -> float:
        return self.gamma[max(level - 1, 0)]

    def Gamma_prev(self, level: int) -> float:
        return self.Gamma[max(level - 1, 0)]


class HypercubeDomain:
    """[0,1]^d with round-robin coordinate bisection."""

    def __init__(self, dimension: int):
        if dimension < 1:
            raise ValueError(f"dimension must be >= 1, got {dimension}")
        self.dimension = int(dimension)

    def __repr__(self):
        return f"HypercubeDomain(dimension={self.dimension})"

    def locate(self, point, level: int) -> SubdomainIndex:
        """Index of the level-`level` cell containing `point`.

        Raises ValueError if a coordinate falls outside [0,1], naming the
        offending coordinate.
        """
        d = self.dimension
        if len(point) != d:
            raise ValueError(f"point has {len(point)} coordinates, domain has {d}")
        for c, x in enumerate(point):
            if not 0.0 <= x <= 1.0:
                raise ValueError(f"coordinate {c} out of range: {x!r} not in [0, 1]")
        if level < 0:
            raise ValueError(f"level must be >= 0, got {level}")
        bits = []
        for t in range(level):
            axis = t % d
            m = t // d + 1  # cuts applied to this axis so far, including this one
            # x * 2**m is exact in binary floating point, so the cell index
            # agrees bit for bit with the vectorized kernels.
            cell = min(int(point[axis] * 2.0**m), (1 << m) - 1)
            bits.append("1" if cell & 1 else "0")
        return SubdomainIndex("".join(bits))

    def subdomain_bounds(self, index: SubdomainIndex):
        """(lower, upper) corner tuples of the cell.

        The cell is the product of [lower_c, upper_c) per coordinate, with
        the upper end closed where upper_c == 1.0.
        """
        d = self.dimension
        lo = [0.0] * d
        width = [1.0] * d
        for t, b in enumerate(index.bits):
            axis = t % d
            width[axis] *= 0.5
            if b == "1":
                lo[axis] += width[axis]
        hi = [lo[c] + width[c] for c in range(d)]
        return tuple(lo), tuple(hi)

    def diameter(self, index: SubdomainIndex) -> float:
        """l-infinity diameter of the cell: the width of its widest axis."""
        return 2.0 ** -(index.level // self.dimension)

    def geometry(self, max_level: int) -> LevelGeometry:
        if max_level < 0:
            raise ValueError(f"max_level must be >= 0, got {max_level}")
        gamma = tuple(2.0 ** -(l // self.dimension) for l in range(max_level + 1))
        Gamma = tuple((1 << l) * g for l, g in enumerate(gamma))
        return LevelGeometry(gamma=gamma, Gamma=Gamma)


def key_code(index: SubdomainIndex) -> int:
    """Pack an index into one integer: (1 << level) | bits.

    The leading 1 separates levels, so "0" and "00" get distinct codes.
    Levels above 62 would overflow the unsigned 64-bit lane used by the
    sketch kernels.
    """
    level = index.level
    if level > 62:
        raise ValueError(f"level {level} too deep for 64-bit key codes")
    return (1 << level) | index.as_int()

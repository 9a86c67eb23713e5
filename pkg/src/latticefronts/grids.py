"""Uniform grids with exact unit shifts.

The lattice coupling shifts by exactly one unit, so the grid spacing is
h = 1/m for an integer m and a shift by one unit is a shift by exactly m
nodes; all shift arithmetic is done on node indices, never on floats.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError


@dataclass(frozen=True)
class ProfileGrid:
    """Nodes j/m for j in [j_lo, j_hi]; symmetric [-L, L] by default."""

    m: int
    j_lo: int
    j_hi: int

    def __init__(self, m: int, L: float = None, *, j_lo: int = None,
                 j_hi: int = None):
        if not (isinstance(m, (int, np.integer)) and m >= 1):
            raise ParameterError(f"m must be a positive integer, got {m!r}")
        if L is not None:
            span = L * m
            if abs(span - round(span)) > 1e-9:
                raise ParameterError(f"L = {L} is not a multiple of h = 1/{m}")
            j_hi = int(round(span))
            j_lo = -j_hi
        if j_lo is None or j_hi is None:
            raise ParameterError("provide either L or both j_lo and j_hi")
        object.__setattr__(self, "m", int(m))
        object.__setattr__(self, "j_lo", int(j_lo))
        object.__setattr__(self, "j_hi", int(j_hi))
        if self.hi - self.lo < 20:
            raise ParameterError(
                f"grid [{self.lo:g}, {self.hi:g}] too narrow: both tails need "
                "room, require a width of at least 20 units")

    @classmethod
    def asymmetric(cls, m: int, lo: float, hi: float) -> "ProfileGrid":
        jl, jh = lo * m, hi * m
        if abs(jl - round(jl)) > 1e-9 or abs(jh - round(jh)) > 1e-9:
            raise ParameterError("grid endpoints must be multiples of h = 1/m")
        return cls(m, j_lo=int(round(jl)), j_hi=int(round(jh)))

    @property
    def h(self) -> float:
        return 1.0 / self.m

    @property
    def lo(self) -> float:
        return self.j_lo / self.m

    @property
    def hi(self) -> float:
        return self.j_hi / self.m

    @property
    def L(self) -> float:
        """Half-width; meaningful for symmetric grids."""
        return max(-self.lo, self.hi)

    @property
    def n_points(self) -> int:
        return self.j_hi - self.j_lo + 1

    @property
    def xi(self) -> np.ndarray:
        return np.arange(self.j_lo, self.j_hi + 1) / self.m

    def extended_left(self, amount: float) -> "ProfileGrid":
        """New grid reaching ``amount`` further left (rounded out to a node)."""
        extra = int(np.ceil(amount * self.m))
        return ProfileGrid(self.m, j_lo=self.j_lo - extra, j_hi=self.j_hi)

    def index_of(self, x: float) -> int:
        j = x * self.m - self.j_lo
        if abs(j - round(j)) > 1e-6:
            raise ParameterError(f"{x} is not a grid node")
        return int(round(j))

    def compatible(self, other: "ProfileGrid") -> bool:
        """Same spacing and aligned nodes (indices refer to the same lattice)."""
        return self.m == other.m

"""Piecewise external fields on K, with optional +inf regions."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.polynomial import polynomial as P

from .errors import AllInfinite, PointOutsideK
from .geometry import CompactSet, Piece

INF = math.inf


@dataclass(frozen=True)
class FieldPiece:
    """Field values on one region: constant, +inf, or polynomial in local arclength."""

    region: Piece
    value: float | None = None
    poly: tuple[float, ...] | None = None

    def __post_init__(self):
        if (self.value is None) == (self.poly is None):
            raise ValueError("give exactly one of value or poly")
        if self.value is not None and (math.isnan(self.value) or self.value == -INF):
            raise ValueError("field values must be real or +inf")
        if self.poly is not None:
            object.__setattr__(self, "poly", tuple(float(c) for c in self.poly))

    @property
    def finite(self) -> bool:
        return self.poly is not None or self.value < INF

    def evaluate(self, s):
        if self.poly is not None:
            return P.polyval(s, self.poly)
        return np.full(np.shape(s), self.value, dtype=float)


class ExternalField:
    """Lower semicontinuous field on K assembled from pieces.

    Where regions overlap (shared endpoints) the smallest value wins, which
    keeps the field lower semicontinuous at junctions. Points of K outside
    every region get ``default``.
    """

    def __init__(self, K: CompactSet, pieces: Sequence[FieldPiece] = (), default: float = INF):
        self.K = K
        self.pieces = tuple(pieces)
        self.default = float(default)
        if math.isnan(self.default) or self.default == -INF:
            raise ValueError("default must be real or +inf")
        if not (self.default < INF or any(p.finite and p.region.length > 0 for p in self.pieces)):
            raise ValueError("field is +inf on all of K (not admissible)")

    @classmethod
    def constant(cls, K: CompactSet, c: float) -> "ExternalField":
        return cls(K, (), default=c)

    def values(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        if not np.all(self.K.contains(z)):
            bad = z[~self.K.contains(z)] if z.ndim else z
            raise PointOutsideK(f"point(s) {np.ravel(bad)[:3]} not on K")
        out = np.full(z.shape, INF)
        hit_any = np.zeros(z.shape, dtype=bool)
        for piece in self.pieces:
            s = piece.region.locate(z)
            hit = ~np.isnan(s)
            if np.any(hit):
                out[hit] = np.minimum(out[hit], piece.evaluate(s[hit]))
                hit_any |= hit
        out[~hit_any] = self.default
        return out

    def __call__(self, z):
        v = self.values(z)
        return float(v) if v.ndim == 0 else v

    def is_nonnegative_on(self, grid) -> bool:
        return bool(np.all(self.values(grid) >= 0))

    def sup_abs_finite(self, grid) -> float:
        v = self.values(grid)
        v = v[np.isfinite(v)]
        return float(np.max(np.abs(v))) if len(v) else 0.0


def field_eval(f: ExternalField, z):
    return f(z)


def field_min(f: ExternalField, grid):
    """(beta, argmin) over the grid; ties go to the earliest grid point."""
    grid = np.atleast_1d(np.asarray(grid, dtype=complex))
    if len(grid) == 0:
        raise ValueError("empty grid")
    v = f.values(grid)
    if not np.any(np.isfinite(v)):
        raise AllInfinite("field is +inf on every grid point")
    k = int(np.argmin(v))
    return float(v[k]), complex(grid[k])

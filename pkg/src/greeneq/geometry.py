"""Compact sets K made of real segments and circular arcs.

Every piece is parametrized by arclength ``s`` in ``[0, length]``; a
``CompactSet`` concatenates its pieces into one global arclength coordinate.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

ON_PIECE_TOL = 1e-12


@dataclass(frozen=True)
class Segment:
    """Real interval [a, b]."""

    a: float
    b: float

    def __post_init__(self):
        if not (math.isfinite(self.a) and math.isfinite(self.b)) or not self.b > self.a:
            raise ValueError(f"segment needs a < b, got [{self.a}, {self.b}]")

    @property
    def length(self) -> float:
        return self.b - self.a

    def point(self, s):
        return self.a + np.asarray(s, dtype=float) + 0j

    def locate(self, z):
        """Arclength of z on the piece, NaN where z is off the piece."""
        z = np.asarray(z, dtype=complex)
        s = z.real - self.a
        on = (np.abs(z.imag) <= ON_PIECE_TOL) & (s >= -ON_PIECE_TOL) & (s <= self.length + ON_PIECE_TOL)
        return np.where(on, np.clip(s, 0.0, self.length), np.nan)

    def chord_log_ratio(self, s, t):
        """log(|p(s) - p(t)| / |s - t|); identically zero on a line."""
        return np.zeros(np.broadcast(np.asarray(s), np.asarray(t)).shape)

    def describe(self):
        return [self.a, self.b]


@dataclass(frozen=True)
class Arc:
    """Arc of the circle |z - center| = radius for angles theta0 <= theta <= theta1."""

    center: complex
    radius: float
    theta0: float
    theta1: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("arc radius must be positive")
        if not 0 < self.theta1 - self.theta0 < 2 * math.pi:
            raise ValueError("arc needs 0 < theta1 - theta0 < 2*pi")

    @property
    def length(self) -> float:
        return self.radius * (self.theta1 - self.theta0)

    def point(self, s):
        th = self.theta0 + np.asarray(s, dtype=float) / self.radius
        return self.center + self.radius * np.exp(1j * th)

    def locate(self, z):
        z = np.asarray(z, dtype=complex)
        w = z - self.center
        on_circle = np.abs(np.abs(w) - self.radius) <= ON_PIECE_TOL * max(1.0, self.radius)
        th = np.angle(w)
        th = self.theta0 + np.mod(th - self.theta0, 2 * math.pi)
        # wrap values just below theta0 back to theta0
        th = np.where(th > self.theta0 + 2 * math.pi - 1e-12, self.theta0, th)
        s = (th - self.theta0) * self.radius
        on = on_circle & (s <= self.length + ON_PIECE_TOL)
        return np.where(on, np.clip(s, 0.0, self.length), np.nan)

    def chord_log_ratio(self, s, t):
        # |p(s) - p(t)| = 2 r sin(|s - t| / 2r)
        u = np.abs(np.asarray(s, dtype=float) - np.asarray(t, dtype=float)) / (2 * self.radius)
        return np.log(np.sinc(u / math.pi))

    def describe(self):
        return {"arc": {"center": [self.center.real, self.center.imag],
                        "radius": self.radius, "theta": [self.theta0, self.theta1]}}


Piece = Union[Segment, Arc]


class CompactSet:
    """Finite disjoint union of pieces, traversed in the given order."""

    def __init__(self, pieces: Sequence[Piece]):
        if not pieces:
            raise ValueError("K needs at least one piece")
        self.pieces = tuple(pieces)
        segs = [p for p in self.pieces if isinstance(p, Segment)]
        if len(segs) == len(self.pieces):
            for left, right in zip(segs, segs[1:]):
                if not right.a > left.b:
                    raise ValueError("intervals must be ordered and disjoint")
        lengths = np.array([p.length for p in self.pieces])
        self.offsets = np.concatenate([[0.0], np.cumsum(lengths)])

    @classmethod
    def intervals(cls, bounds) -> "CompactSet":
        return cls([Segment(float(a), float(b)) for a, b in bounds])

    @property
    def length(self) -> float:
        return float(self.offsets[-1])

    def __repr__(self):
        return f"CompactSet({list(self.pieces)!r})"

    def point(self, s):
        """Point at global arclength s."""
        s = np.asarray(s, dtype=float)
        k = np.clip(np.searchsorted(self.offsets, s, side="right") - 1, 0, len(self.pieces) - 1)
        out = np.empty(s.shape, dtype=complex)
        for i, p in enumerate(self.pieces):
            sel = k == i
            if np.any(sel):
                out[sel] = p.point(s[sel] - self.offsets[i])
        return out

    def locate(self, z):
        """(piece index, local arclength) for each point; index -1 off K."""
        z = np.asarray(z, dtype=complex)
        idx = np.full(z.shape, -1, dtype=int)
        loc = np.full(z.shape, np.nan)
        for i, p in enumerate(self.pieces):
            s = p.locate(z)
            hit = (idx < 0) & ~np.isnan(s)
            idx[hit] = i
            loc[hit] = s[hit]
        return idx, loc

    def contains(self, z):
        return self.locate(z)[0] >= 0

    def arclength(self, z):
        """Global arclength coordinate of points on K (NaN off K)."""
        idx, loc = self.locate(z)
        return np.where(idx >= 0, self.offsets[np.maximum(idx, 0)] + loc, np.nan)

    def uniform_grid(self, n: int) -> np.ndarray:
        """About n points with spacing <= length/n, both endpoints of every piece included."""
        h = self.length / max(int(n), 1)
        pts = []
        for p in self.pieces:
            k = max(int(math.ceil(p.length / h - 1e-9)), 1)
            pts.append(p.point(np.linspace(0.0, p.length, k + 1)))
        return np.concatenate(pts)

    def diameter(self) -> float:
        pts = self.uniform_grid(512)
        return float(np.max(np.abs(pts[:, None] - pts[None, :])))

    def describe(self):
        return [p.describe() for p in self.pieces]


def merge_points(*arrays, K: CompactSet | None = None, tol: float = 1e-12) -> np.ndarray:
    """Union of point arrays with near-duplicates dropped.

    Ordered along K's traversal when K is given, else by (real, imag).
    """
    p = np.concatenate([np.asarray(a, dtype=complex).ravel() for a in arrays])
    if K is not None:
        s = K.arclength(p)
        if np.any(np.isnan(s)):
            raise ValueError("merge_points: some points are not on K")
        order = np.argsort(s, kind="stable")
    else:
        order = np.lexsort((p.imag, p.real))
    p = p[order]
    keep = np.ones(len(p), dtype=bool)
    last = 0
    for i in range(1, len(p)):
        if abs(p[i] - p[last]) <= tol:
            keep[i] = False
        else:
            last = i
    return p[keep]

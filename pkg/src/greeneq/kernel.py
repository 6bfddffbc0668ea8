"""Closed-form Green functions for the right half-plane and the unit disk.

All evaluation routines accept scalars or numpy arrays of complex points and
broadcast like numpy ufuncs.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .errors import DuplicateNodes, PointOutsideDomain

DUPLICATE_TOL = 1e-14


class DomainKind(enum.Enum):
    RIGHT_HALF_PLANE = "half_plane"
    UNIT_DISK = "unit_disk"


@dataclass(frozen=True)
class GreenDomain:
    kind: DomainKind

    @classmethod
    def half_plane(cls) -> "GreenDomain":
        return cls(DomainKind.RIGHT_HALF_PLANE)

    @classmethod
    def unit_disk(cls) -> "GreenDomain":
        return cls(DomainKind.UNIT_DISK)

    @classmethod
    def from_name(cls, name: str) -> "GreenDomain":
        return cls(DomainKind(name))

    @property
    def name(self) -> str:
        return self.kind.value

    def contains(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        if self.kind is DomainKind.RIGHT_HALF_PLANE:
            return z.real > 0
        return np.abs(z) < 1

    def check(self, *points) -> None:
        for z in points:
            inside = self.contains(z)
            if not np.all(inside):
                bad = np.asarray(z, dtype=complex)[~inside] if np.ndim(z) else z
                raise PointOutsideDomain(
                    f"point(s) {np.ravel(bad)[:3]} not in the open {self.name}"
                )

    def _numerator(self, z, w):
        if self.kind is DomainKind.RIGHT_HALF_PLANE:
            return z + np.conj(w)
        return 1 - z * np.conj(w)


def _as_complex(z):
    return np.asarray(z, dtype=complex)


def _unwrap(x):
    return float(x) if np.ndim(x) == 0 else x


def green_eval(domain: GreenDomain, z, w):
    """Green function g(z, w); +inf exactly where z == w."""
    z, w = _as_complex(z), _as_complex(w)
    domain.check(z, w)
    num = np.abs(domain._numerator(z, w))
    den = np.abs(z - w)
    with np.errstate(divide="ignore"):
        out = np.log(num / den)
    return _unwrap(out)


def green_truncated(domain: GreenDomain, M: float, z, w):
    """min(g(z, w), M); finite on the diagonal."""
    if not M > 0:
        raise ValueError("truncation level M must be positive")
    return _unwrap(np.minimum(np.asarray(green_eval(domain, z, w)), M))


def kernel_split_h(domain: GreenDomain, z, w):
    """Regular part h in g(z, w) = log(1/|z - w|) + h(z, w), diagonal included."""
    z, w = _as_complex(z), _as_complex(w)
    domain.check(z, w)
    return _unwrap(np.log(np.abs(domain._numerator(z, w))))


def green_matrix(domain: GreenDomain, z, w, diagonal: float | None = None) -> np.ndarray:
    """Dense block g(z_i, w_j). Coincident pairs are +inf unless ``diagonal`` is given."""
    z = _as_complex(z).ravel()
    w = _as_complex(w).ravel()
    out = np.asarray(green_eval(domain, z[:, None], w[None, :]))
    if diagonal is not None:
        out[np.isinf(out)] = diagonal
    return out


@dataclass(frozen=True)
class KernelMatrix:
    nodes: np.ndarray
    entries: np.ndarray = field(repr=False)

    @property
    def size(self) -> int:
        return len(self.nodes)


def find_duplicate(points, tol: float = DUPLICATE_TOL):
    """First index pair (i, j), i < j, with |p_i - p_j| <= tol, else None."""
    p = _as_complex(points).ravel()
    if len(p) < 2:
        return None
    pairs = cKDTree(np.column_stack([p.real, p.imag])).query_pairs(tol, output_type="ndarray")
    if len(pairs) == 0:
        return None
    i, j = min(tuple(sorted(map(int, q))) for q in pairs)
    return i, j


def assemble_kernel_matrix(domain: GreenDomain, nodes) -> KernelMatrix:
    nodes = _as_complex(nodes).ravel()
    domain.check(nodes)
    dup = find_duplicate(nodes)
    if dup is not None:
        raise DuplicateNodes(*dup)
    G = green_matrix(domain, nodes, nodes, diagonal=0.0)
    # enforce exact symmetry independent of evaluation order
    G = np.triu(G, 1)
    G = G + G.T
    G.setflags(write=False)
    nodes = nodes.copy()
    nodes.setflags(write=False)
    return KernelMatrix(nodes=nodes, entries=G)

"""Discrete measures, potentials, energies, and interval partitions of K."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numpy.polynomial import polynomial as P

from .errors import ConstraintViolated, NTooSmall
from .field import ExternalField
from .geometry import CompactSet
from .kernel import GreenDomain, green_matrix

MASS_TOL = 1e-12


@dataclass(frozen=True)
class WeightedConfiguration:
    """Atoms z_j with masses m_j in [0, R]; the measure is (1/normalization) sum m_j delta_{z_j}."""

    points: np.ndarray
    masses: np.ndarray
    R: float
    normalization: int = field(default=0)

    def __post_init__(self):
        z = np.atleast_1d(np.asarray(self.points, dtype=complex)).copy()
        m = np.atleast_1d(np.asarray(self.masses, dtype=float)).copy()
        if z.shape != m.shape or z.ndim != 1:
            raise ValueError("points and masses must be 1-d arrays of equal length")
        if not self.R > 0:
            raise ValueError("mass cap R must be positive")
        if np.any(m < -MASS_TOL) or np.any(m > self.R + MASS_TOL):
            raise ValueError("masses must lie in [0, R]")
        m = np.clip(m, 0.0, self.R)
        z.setflags(write=False)
        m.setflags(write=False)
        object.__setattr__(self, "points", z)
        object.__setattr__(self, "masses", m)
        n = int(self.normalization) if self.normalization else len(z)
        if n < 1:
            raise ValueError("normalization must be positive")
        object.__setattr__(self, "normalization", n)

    @property
    def size(self) -> int:
        return len(self.points)

    @property
    def total_mass(self) -> float:
        return float(np.sum(self.masses)) / self.normalization

    def support(self, threshold: float = 0.0):
        """Indices of atoms with mass above threshold."""
        return np.flatnonzero(self.masses > threshold)

    def weights(self) -> np.ndarray:
        return self.masses / self.normalization


def green_potential(domain: GreenDomain, mu: WeightedConfiguration, z):
    """U_G^mu(z) = (1/N) sum_j m_j g(z, z_j)."""
    z = np.asarray(z, dtype=complex)
    domain.check(z)
    if mu.size == 0:
        return 0.0 if z.ndim == 0 else np.zeros(z.shape)
    pos = mu.masses > 0
    out = np.zeros(z.size)
    if np.any(pos):
        G = green_matrix(domain, z.ravel(), mu.points[pos])
        out = G @ mu.masses[pos] / mu.normalization
    out = out.reshape(z.shape)
    return float(out) if z.ndim == 0 else out


def log_potential(mu: WeightedConfiguration, z):
    """U^mu(z) = (1/N) sum_j m_j log(1/|z - z_j|)."""
    z = np.asarray(z, dtype=complex)
    pos = mu.masses > 0
    out = np.zeros(z.size)
    if np.any(pos):
        with np.errstate(divide="ignore"):
            L = -np.log(np.abs(z.ravel()[:, None] - mu.points[pos][None, :]))
        out = L @ mu.masses[pos] / mu.normalization
    out = out.reshape(z.shape)
    return float(out) if z.ndim == 0 else out


def pair_energy(domain: GreenDomain, points, masses) -> float:
    """sum_{i != j} m_i m_j g(z_i, z_j), with 0 * inf = 0."""
    z = np.asarray(points, dtype=complex)
    m = np.asarray(masses, dtype=float)
    pos = m > 0
    if np.count_nonzero(pos) < 2:
        return 0.0
    zp, mp = z[pos], m[pos]
    G = green_matrix(domain, zp, zp)
    np.fill_diagonal(G, 0.0)
    return float(mp @ G @ mp)


def discrete_energy(domain: GreenDomain, f: ExternalField, cfg: WeightedConfiguration) -> float:
    """E_{N,f} = sum_{i != j} m_i m_j g(z_i, z_j) + 2 N sum_j m_j f(z_j)."""
    pos = cfg.masses > 0
    if not np.any(pos):
        return 0.0
    domain.check(cfg.points)
    fv = f.values(cfg.points[pos])
    if np.any(np.isinf(fv)):
        return math.inf
    lin = 2.0 * cfg.normalization * float(cfg.masses[pos] @ fv)
    return pair_energy(domain, cfg.points, cfg.masses) + lin


# ---------------------------------------------------------------------------
# partitions


@dataclass(frozen=True)
class PartitionedSet:
    """Cells V_j (global arclength intervals of K), nodes x_j and lambda(V_j)."""

    K: CompactSet
    cells: np.ndarray  # (l_N, 2) arclength bounds
    nodes: np.ndarray
    lam: np.ndarray
    N: int
    kappa: float
    C: float

    @property
    def l_N(self) -> int:
        return len(self.nodes)

    def min_separation(self) -> float:
        if self.l_N < 2:
            return math.inf
        d = np.abs(self.nodes[:, None] - self.nodes[None, :])
        np.fill_diagonal(d, np.inf)
        return float(d.min())

    def cell_lengths(self) -> np.ndarray:
        """Arclength of each cell, an upper bound for its diameter."""
        return self.cells[:, 1] - self.cells[:, 0]


def build_interval_partition(K: CompactSet, N: int) -> PartitionedSet:
    """Split each piece into cells of arclength L/N (the last one possibly shorter), nodes at midpoints."""
    N = int(N)
    L = K.length
    if N < 1:
        raise NTooSmall("N must be at least 1")
    delta = L / N
    shortest = min(p.length for p in K.pieces)
    if not delta < shortest:
        raise NTooSmall(f"N={N} too small: cell length {delta:g} >= shortest piece {shortest:g}")
    cells, nodes = [], []
    for i, p in enumerate(K.pieces):
        rho = int(math.ceil(N * p.length / L - 1e-9))
        for k in range(rho):
            s0 = k * delta
            s1 = min((k + 1) * delta, p.length)
            if s1 - s0 <= 1e-12 * L:
                continue
            cells.append((K.offsets[i] + s0, K.offsets[i] + s1))
            nodes.append(p.point(0.5 * (s0 + s1)))
    cells = np.array(cells, dtype=float)
    lam = (cells[:, 1] - cells[:, 0]) / L
    return PartitionedSet(K=K, cells=cells, nodes=np.array(nodes, dtype=complex), lam=lam,
                          N=N, kappa=delta, C=L / 2)


# ---------------------------------------------------------------------------
# densities with respect to lambda


class PiecewiseDensity:
    """Density rho = d mu / d lambda, lambda = normalized arclength on K.

    ``rho`` is a polynomial in global arclength on each [breaks[k], breaks[k+1]]
    and zero elsewhere.
    """

    def __init__(self, K: CompactSet, breaks, coeffs: Sequence[Sequence[float]]):
        self.K = K
        self.breaks = np.asarray(breaks, dtype=float)
        self.coeffs = [np.atleast_1d(np.asarray(c, dtype=float)) for c in coeffs]
        if len(self.coeffs) != len(self.breaks) - 1:
            raise ValueError("need one coefficient vector per break interval")
        if np.any(np.diff(self.breaks) < 0):
            raise ValueError("breaks must be nondecreasing")
        self._anti = [P.polyint(c) for c in self.coeffs]

    @classmethod
    def constant(cls, K: CompactSet, c: float) -> "PiecewiseDensity":
        return cls(K, [0.0, K.length], [[c]])

    @classmethod
    def zero(cls, K: CompactSet) -> "PiecewiseDensity":
        return cls.constant(K, 0.0)

    @classmethod
    def from_cell_masses(cls, P_: PartitionedSet, w) -> "PiecewiseDensity":
        """Uniform density on each cell carrying mass w_j."""
        w = np.asarray(w, dtype=float)
        dens = w / P_.lam
        breaks, coeffs = [P_.cells[0, 0]], []
        for (s0, s1), d in zip(P_.cells, dens):
            if s0 > breaks[-1]:
                coeffs.append([0.0])
                breaks.append(s0)
            coeffs.append([d])
            breaks.append(s1)
        return cls(P_.K, breaks, coeffs)

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        out = np.zeros(s.shape)
        for k, c in enumerate(self.coeffs):
            lo, hi = self.breaks[k], self.breaks[k + 1]
            sel = (s >= lo) & (s <= hi) if k == len(self.coeffs) - 1 else (s >= lo) & (s < hi)
            out[sel] = P.polyval(s[sel], c)
        return out

    def mass_between(self, s0: float, s1: float) -> float:
        """mu of the arclength interval [s0, s1]."""
        tot = 0.0
        for k, a in enumerate(self._anti):
            lo = max(s0, self.breaks[k])
            hi = min(s1, self.breaks[k + 1])
            if hi > lo:
                tot += P.polyval(hi, a) - P.polyval(lo, a)
        return tot / self.K.length

    @property
    def total_mass(self) -> float:
        return self.mass_between(self.breaks[0], self.breaks[-1])

    def max_density(self, samples: int = 65) -> float:
        best = -math.inf
        for k, c in enumerate(self.coeffs):
            lo, hi = self.breaks[k], self.breaks[k + 1]
            if len(c) == 1:
                best = max(best, c[0])
            else:
                best = max(best, float(np.max(P.polyval(np.linspace(lo, hi, samples), c))))
        return best

    def min_density(self, samples: int = 65) -> float:
        return -PiecewiseDensity(self.K, self.breaks, [-c for c in self.coeffs]).max_density(samples)

    def quadrature(self, order: int = 16, per_piece: int = 1):
        """Nodes (points on K) and weights integrating against mu."""
        x, wq = np.polynomial.legendre.leggauss(order)
        pts, wts = [], []
        for k, c in enumerate(self.coeffs):
            lo, hi = self.breaks[k], self.breaks[k + 1]
            if hi <= lo:
                continue
            sub = np.linspace(lo, hi, per_piece + 1)
            for a, b in zip(sub[:-1], sub[1:]):
                s = 0.5 * (b - a) * x + 0.5 * (a + b)
                pts.append(self.K.point(s))
                wts.append(0.5 * (b - a) * wq * P.polyval(s, c) / self.K.length)
        if not pts:
            return np.zeros(0, dtype=complex), np.zeros(0)
        return np.concatenate(pts), np.concatenate(wts)


def discretize_upper_constrained(density: PiecewiseDensity, P_: PartitionedSet, R: float) -> WeightedConfiguration:
    """Masses m_j = N mu(V_j) at the nodes, normalization l_N."""
    if density.min_density() < -MASS_TOL:
        raise ConstraintViolated("density must be nonnegative")
    if density.max_density() > R + MASS_TOL:
        raise ConstraintViolated(f"density exceeds the cap R={R}")
    m = np.array([P_.N * density.mass_between(s0, s1) for s0, s1 in P_.cells])
    if np.any(m > R + MASS_TOL):
        j = int(np.argmax(m))
        raise ConstraintViolated(f"mass m_{j}={m[j]:.17g} exceeds R={R}")
    return WeightedConfiguration(P_.nodes, np.clip(m, 0.0, R), R, normalization=P_.l_N)


# ---------------------------------------------------------------------------
# moment discrepancy


def _atoms(mu):
    if isinstance(mu, WeightedConfiguration):
        return mu.points, mu.weights()
    if isinstance(mu, PiecewiseDensity):
        return mu.quadrature(order=24, per_piece=8)
    raise TypeError("expected WeightedConfiguration or PiecewiseDensity")


def weakstar_discrepancy(mu_a, mu_b, k_max: int, K: CompactSet | None = None) -> float:
    """Max over Re z^k, Im z^k (k <= k_max) of |int phi dmu_a - int phi dmu_b| after rescaling to [-1, 1]."""
    za, wa = _atoms(mu_a)
    zb, wb = _atoms(mu_b)
    pts = [za[wa != 0], zb[wb != 0]]
    if K is not None:
        pts.append(K.uniform_grid(256))
    allp = np.concatenate(pts)
    if len(allp) == 0:
        return 0.0
    lo = complex(allp.real.min(), allp.imag.min())
    hi = complex(allp.real.max(), allp.imag.max())
    center = 0.5 * (lo + hi)
    half = 0.5 * max(hi.real - lo.real, hi.imag - lo.imag)
    if half == 0:
        half = 1.0
    ua, ub = (za - center) / half, (zb - center) / half
    worst = 0.0
    for k in range(int(k_max) + 1):
        d = np.sum(wa * ua ** k) - np.sum(wb * ub ** k)
        worst = max(worst, abs(d.real), abs(d.imag))
    return float(worst)

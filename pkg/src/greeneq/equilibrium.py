"""Continuous equilibrium estimates from piecewise-uniform densities.

The measure is uniform (in arclength) on each cell of a fine partition, with
cell masses w_j. Its energy is w A w + 2 b w, where A_ij is the average of g
over V_i x V_j and b_j the average of f over V_j. A is a Gram matrix of a
positive definite kernel, so the problem is a convex QP; it is solved exactly
as a bounded least-squares problem after a Cholesky factorization.

The logarithmic part of A is integrated in closed form for cells on a common
line (or a common arc, in arclength); the smooth remainder uses Gauss-Legendre.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cholesky, solve_triangular
from scipy.optimize import lsq_linear

from .field import ExternalField
from .geometry import Arc, CompactSet
from .kernel import GreenDomain, kernel_split_h
from .measure import PartitionedSet, PiecewiseDensity, build_interval_partition

MASS_TOL = 1e-9


def _F2(u):
    """Second antiderivative of log|u|: u^2 log|u| / 2 - 3 u^2 / 4."""
    u = np.asarray(u, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = 0.5 * u * u * np.log(np.abs(u)) - 0.75 * u * u
    return np.where(u == 0, 0.0, out)


def _F1(u):
    """Antiderivative of log|u|: u log|u| - u."""
    u = np.asarray(u, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = u * np.log(np.abs(u)) - u
    return np.where(u == 0, 0.0, out)


def log_cell_pair_integral(a, b, c, d):
    """Integral of log|x - y| over [a, b] x [c, d] (broadcasting)."""
    return _F2(b - c) + _F2(a - d) - _F2(b - d) - _F2(a - c)


def log_cell_integral(x, c, d):
    """Integral of log|x - y| over y in [c, d] (broadcasting)."""
    return _F1(x - c) - _F1(x - d)


class _CellGeometry:
    """Cells of a partition with line coordinates and Gauss points."""

    def __init__(self, P: PartitionedSet, q: int):
        K = P.K
        self.P = P
        self.q = q
        M = P.l_N
        s0, s1 = P.cells[:, 0], P.cells[:, 1]
        piece = np.searchsorted(K.offsets, 0.5 * (s0 + s1), side="right") - 1
        self.piece = piece
        # common line coordinate: real part for segments, arclength per arc
        group = np.zeros(M, dtype=int)
        lo, hi = np.empty(M), np.empty(M)
        for i, p in enumerate(K.pieces):
            sel = piece == i
            if isinstance(p, Arc):
                group[sel] = i + 1
                lo[sel], hi[sel] = s0[sel], s1[sel]
            else:
                lo[sel] = p.a + (s0[sel] - K.offsets[i])
                hi[sel] = p.a + (s1[sel] - K.offsets[i])
        self.group, self.lo, self.hi = group, lo, hi
        x, wq = np.polynomial.legendre.leggauss(q)
        self.gs = 0.5 * (s1 - s0)[:, None] * x[None, :] + 0.5 * (s0 + s1)[:, None]
        self.gw = np.broadcast_to(0.5 * wq, (M, q)).copy()  # averages: weights sum to 1
        self.gz = K.point(self.gs.ravel()).reshape(M, q)
        self.arc_of_piece = [p if isinstance(p, Arc) else None for p in K.pieces]

    @property
    def size(self):
        return self.P.l_N


def _cell_average_matrix(cg: _CellGeometry, domain: GreenDomain) -> np.ndarray:
    M, q = cg.size, cg.q
    z = cg.gz.ravel()
    w = cg.gw
    # smooth part h
    H = kernel_split_h(domain, z[:, None], z[None, :]).reshape(M, q, M, q)
    A = np.einsum("iajb,ia,jb->ij", H, w, w)
    # log(1/|z - zeta|): closed form within a line group, quadrature across groups
    same = cg.group[:, None] == cg.group[None, :]
    L = np.zeros((M, M))
    width = cg.hi - cg.lo
    exact = log_cell_pair_integral(cg.lo[:, None], cg.hi[:, None], cg.lo[None, :], cg.hi[None, :])
    L[same] = -(exact / np.outer(width, width))[same]
    if not np.all(same):
        with np.errstate(divide="ignore"):
            Lq = -np.log(np.abs(z[:, None] - z[None, :])).reshape(M, q, M, q)
        Lcross = np.einsum("iajb,ia,jb->ij", Lq, w, w)
        L[~same] = Lcross[~same]
    # arcs: |p(s) - p(t)| = |s - t| * sinc factor, subtract its log
    for i, arc in enumerate(cg.arc_of_piece):
        if arc is None:
            continue
        sel = np.flatnonzero(cg.piece == i)
        s = cg.gs[sel].ravel()
        C = arc.chord_log_ratio(s[:, None], s[None, :]).reshape(len(sel), q, len(sel), q)
        L[np.ix_(sel, sel)] -= np.einsum("iajb,ia,jb->ij", C, w[sel], w[sel])
    A = A + L
    return 0.5 * (A + A.T)


def _cell_potential(cg: _CellGeometry, domain: GreenDomain, z) -> np.ndarray:
    """Matrix of averages over each cell of g(z_k, .) for points z on K."""
    z = np.asarray(z, dtype=complex).ravel()
    K = cg.P.K
    M, q = cg.size, cg.q
    H = kernel_split_h(domain, z[:, None], cg.gz.ravel()[None, :]).reshape(len(z), M, q)
    out = np.einsum("kjb,jb->kj", H, cg.gw)
    idx, loc = K.locate(z)
    if np.any(idx < 0):
        raise ValueError("potential points must lie on K")
    zgroup = np.zeros(len(z), dtype=int)
    zcoord = z.real.copy()
    for i, p in enumerate(K.pieces):
        if isinstance(p, Arc):
            sel = idx == i
            zgroup[sel] = i + 1
            zcoord[sel] = K.offsets[i] + loc[sel]
    same = zgroup[:, None] == cg.group[None, :]
    width = cg.hi - cg.lo
    Lx = -log_cell_integral(zcoord[:, None], cg.lo[None, :], cg.hi[None, :]) / width[None, :]
    if not np.all(same):
        with np.errstate(divide="ignore"):
            Lq = -np.log(np.abs(z[:, None] - cg.gz.ravel()[None, :])).reshape(len(z), M, q)
        Lcross = np.einsum("kjb,jb->kj", Lq, cg.gw)
        Lx = np.where(same, Lx, Lcross)
    for i, arc in enumerate(cg.arc_of_piece):
        if arc is None:
            continue
        rows = np.flatnonzero(idx == i)
        cols = np.flatnonzero(cg.piece == i)
        if len(rows) == 0:
            continue
        s = K.offsets[i] + loc[rows]
        C = arc.chord_log_ratio(s[:, None, None], cg.gs[cols][None, :, :])
        Lx[np.ix_(rows, cols)] -= np.einsum("kjb,jb->kj", C, cg.gw[cols])
    return out + Lx


@dataclass
class GalerkinSystem:
    """Discretized energy on a fixed partition; reusable across R."""

    domain: GreenDomain
    f: ExternalField
    P: PartitionedSet
    A: np.ndarray
    b: np.ndarray
    q: int
    _geom: _CellGeometry = field(repr=False)
    _chol: tuple = field(default=None, repr=False)

    @property
    def free(self):
        return np.isfinite(self.b)

    def factor(self):
        if self._chol is None:
            fr = self.free
            A = self.A[np.ix_(fr, fr)]
            jitter = 0.0
            for _ in range(8):
                try:
                    U = cholesky(A + jitter * np.eye(len(A)), lower=False)
                    break
                except np.linalg.LinAlgError:
                    jitter = max(1e-14 * np.trace(A) / len(A), 10 * jitter)
            else:  # pragma: no cover
                raise np.linalg.LinAlgError("Galerkin matrix not positive definite")
            self._chol = (U, jitter)
        return self._chol

    def energy(self, w) -> float:
        w = np.asarray(w, dtype=float)
        fr = self.free & (w > 0)
        if np.any((w > 0) & ~self.free):
            return math.inf
        return float(w[fr] @ self.A[np.ix_(fr, fr)] @ w[fr] + 2.0 * self.b[fr] @ w[fr])


def galerkin_system(domain: GreenDomain, K: CompactSet, f: ExternalField, cells: int = 512,
                    q: int = 4) -> GalerkinSystem:
    """Assemble A and b on a uniform partition of K with ``cells`` cells."""
    P = build_interval_partition(K, cells)
    cg = _CellGeometry(P, q)
    domain.check(cg.gz)
    A = _cell_average_matrix(cg, domain)
    fv = f.values(cg.gz.ravel()).reshape(cg.size, q)
    b = np.where(np.all(np.isfinite(fv), axis=1), np.sum(np.where(np.isfinite(fv), fv, 0.0) * cg.gw, axis=1), np.inf)
    return GalerkinSystem(domain=domain, f=f, P=P, A=A, b=b, q=q, _geom=cg)


@dataclass
class GalerkinEquilibrium:
    system: GalerkinSystem
    R: float
    w: np.ndarray
    value: float
    multiplier: float = 0.0
    constrained: bool = False

    @property
    def mass(self) -> float:
        return float(np.sum(self.w))

    def density(self) -> PiecewiseDensity:
        return PiecewiseDensity.from_cell_masses(self.system.P, self.w)

    def potential(self, z) -> np.ndarray:
        """Green potential of the piecewise-uniform measure at points of K."""
        Pm = _cell_potential(self.system._geom, self.system.domain, z)
        return Pm @ self.w

    def C_f(self, tol: float = MASS_TOL) -> float:
        if self.mass < self.R - tol:
            return 0.0
        s = self.system
        fr = self.w > 0
        return float(self.w[fr] @ s.A[np.ix_(fr, fr)] @ self.w[fr] + s.b[fr] @ self.w[fr]) / self.R


def _bounded_qp(system: GalerkinSystem, shift: float, upper) -> np.ndarray:
    """argmin w A w + 2 (b + shift) w over 0 <= w <= upper on the free cells."""
    fr = system.free
    b = system.b[fr] + shift
    w = np.zeros(len(system.b))
    if np.all(b >= 0):
        return w
    U, _ = system.factor()
    # w A w + 2 b w = |U w + U^{-T} b|^2 - const
    y = -solve_triangular(U, b, trans="T", lower=False)
    ub = np.broadcast_to(np.asarray(upper, dtype=float), system.b.shape)[fr]
    res = lsq_linear(U, y, bounds=(np.zeros(len(b)), ub), method="bvls", tol=1e-14,
                     lsq_solver="exact", max_iter=20 * len(b))
    w[fr] = np.clip(res.x, 0.0, ub)
    return w


def solve_ball(system: GalerkinSystem, R: float, iters: int = 200) -> GalerkinEquilibrium:
    """Minimize over piecewise-uniform measures with total mass <= R."""
    w = _bounded_qp(system, 0.0, np.inf)
    nu = 0.0
    if w.sum() > R:
        lo, hi = 0.0, 2.0 * float(np.max(-system.b[system.free])) + 1.0
        w_hi = _bounded_qp(system, 0.5 * hi, np.inf)
        for _ in range(iters):
            mid = 0.5 * (lo + hi)
            wm = _bounded_qp(system, 0.5 * mid, np.inf)
            if wm.sum() > R:
                lo = mid
            else:
                hi, w_hi = mid, wm
            if hi - lo <= 1e-15 * max(1.0, hi):
                break
        w, nu = w_hi, hi
    return GalerkinEquilibrium(system=system, R=float(R), w=w, value=system.energy(w), multiplier=nu)


def solve_upper(system: GalerkinSystem, R: float) -> GalerkinEquilibrium:
    """Minimize over piecewise-uniform measures with mu <= R lambda (lambda = normalized length)."""
    w = _bounded_qp(system, 0.0, R * system.P.lam)
    return GalerkinEquilibrium(system=system, R=float(R), w=w, value=system.energy(w), constrained=True)

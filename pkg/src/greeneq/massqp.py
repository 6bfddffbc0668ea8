"""Mass optimization at prescribed nodes: minimize m G m + F m over the box [0, R]^l.

G has zero diagonal, so the objective is affine in each coordinate separately
and its minimum over the box is attained at a vertex. Coordinate descent moves
each coordinate to the endpoint opposite the sign of its partial derivative.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ProblemTooLarge, SingularMatrix
from .field import ExternalField
from .kernel import GreenDomain, KernelMatrix, assemble_kernel_matrix

BOUNDARY_BAND = 1e-10


@dataclass(frozen=True)
class MassProblem:
    """Objective m G m^T + 2 N sum_j m_j f(x_j) with masses in [0, R].

    Nodes with f = +inf have their mass frozen at zero.
    """

    G: KernelMatrix
    fvals: np.ndarray
    N: int
    R: float

    def __post_init__(self):
        fv = np.asarray(self.fvals, dtype=float).ravel().copy()
        if fv.shape != (self.G.size,):
            raise ValueError("fvals length must match the number of nodes")
        if np.any(np.isnan(fv)) or np.any(fv == -math.inf):
            raise ValueError("field values must be real or +inf")
        if not self.R > 0:
            raise ValueError("R must be positive")
        fv.setflags(write=False)
        object.__setattr__(self, "fvals", fv)

    @classmethod
    def from_nodes(cls, domain: GreenDomain, nodes, f: ExternalField, R: float, N: int | None = None):
        G = assemble_kernel_matrix(domain, nodes)
        return cls(G=G, fvals=f.values(G.nodes), N=int(N or G.size), R=float(R))

    @property
    def size(self) -> int:
        return self.G.size

    @property
    def F(self) -> np.ndarray:
        return 2.0 * self.N * self.fvals

    @property
    def free(self) -> np.ndarray:
        """Mask of nodes whose mass may be positive."""
        return np.isfinite(self.fvals)

    def F_norm(self) -> float:
        F = self.F[self.free]
        return float(np.max(np.abs(F))) if len(F) else 0.0

    def objective(self, m) -> float:
        m = np.asarray(m, dtype=float)
        pos = m > 0
        if np.any(pos & ~self.free):
            return math.inf
        mp = m[pos]
        Gp = self.G.entries[np.ix_(pos, pos)]
        return float(mp @ Gp @ mp + self.F[pos] @ mp)

    def gradient(self, m) -> np.ndarray:
        """c = 2 G m + F; entries at frozen nodes are +inf."""
        m = np.asarray(m, dtype=float)
        c = 2.0 * (self.G.entries @ np.where(self.free, m, 0.0))
        with np.errstate(invalid="ignore"):
            c = c + self.F
        return c


@dataclass
class MassSolution:
    masses: np.ndarray
    objective: float
    kkt_residual: float
    active_set: np.ndarray
    iterations: int
    converged: bool = True
    start_index: int = 0
    local_objectives: list = field(default_factory=list)


def mass_partial(problem: MassProblem, m, i: int) -> float:
    """c_i = 2 sum_{j != i} m_j G_ij + F_i."""
    m = np.asarray(m, dtype=float)
    if not problem.free[i]:
        return math.inf
    row = problem.G.entries[i]
    mm = np.where(problem.free, m, 0.0)
    return float(2.0 * (row @ mm) + problem.F[i])


def kkt_residual(problem: MassProblem, m, band: float = BOUNDARY_BAND):
    """Per-coordinate first-order residual and its maximum."""
    m = np.asarray(m, dtype=float)
    c = problem.gradient(m)
    res = np.zeros(problem.size)
    at0 = m <= band
    atR = m >= problem.R - band
    inner = ~at0 & ~atR
    fr = problem.free
    res[fr & at0] = np.maximum(0.0, -c[fr & at0])
    res[fr & atR & ~at0] = np.maximum(0.0, c[fr & atR & ~at0])
    res[fr & inner] = np.abs(c[fr & inner])
    return res, float(res.max()) if len(res) else 0.0


def _pos_sum(G, m):
    """2 sum_j G_ij m_j over m_j > 0 (so 0 * inf = 0)."""
    pos = m > 0
    if not np.any(pos):
        return np.zeros(G.shape[0])
    return 2.0 * (G[:, pos] @ m[pos])


def box_objective(G, F, m) -> float:
    """m G m + F m with the 0 * inf = 0 convention; G may hold +inf off the diagonal."""
    m = np.asarray(m, dtype=float)
    pos = m > 0
    if not np.any(pos):
        return 0.0
    mp = m[pos]
    Fp = F[pos]
    if np.any(np.isinf(Fp)):
        return math.inf
    Gp = G[np.ix_(pos, pos)]
    if np.any(np.isinf(Gp)):
        return math.inf
    return float(mp @ Gp @ mp + Fp @ mp)


def coordinate_descent(G, F, R: float, m0, tol: float, max_sweeps: int):
    """Cyclic bang-bang coordinate descent on m G m + F m over [0, R]^l.

    G has zero diagonal and may hold +inf between coincident points; F may hold
    +inf at forbidden points. Each coordinate goes to 0 if its partial
    derivative exceeds tol, to R if it is below -tol, and stays otherwise.
    Returns (m, sweeps, converged).
    """
    G = np.asarray(G, dtype=float)
    F = np.asarray(F, dtype=float)
    m = np.where(np.isfinite(F), np.clip(np.asarray(m0, dtype=float), 0.0, R), 0.0)
    col_inf = np.isinf(G).any(axis=0)
    with np.errstate(invalid="ignore"):
        c = _pos_sum(G, m) + F
    obj = box_objective(G, F, m)
    for sweep in range(1, max_sweeps + 1):
        changed = False
        for i in range(len(m)):
            ci = c[i]
            if ci > tol:
                target = 0.0
            elif ci < -tol:
                target = R
            else:
                continue
            delta = target - m[i]
            if delta == 0.0:
                continue
            m[i] = target
            changed = True
            if col_inf[i]:
                with np.errstate(invalid="ignore"):
                    c = _pos_sum(G, m) + F
            else:
                c += 2.0 * G[:, i] * delta
        with np.errstate(invalid="ignore"):
            c = _pos_sum(G, m) + F
        new_obj = box_objective(G, F, m)
        assert new_obj <= obj + 1e-9 * (1.0 + abs(obj)), "sweep increased the objective"
        obj = new_obj
        if not changed:
            return m, sweep, True
    return m, max_sweeps, False


def solve_masses(problem: MassProblem, starts: int = 0, max_sweeps: int | None = None,
                 tol: float | None = None, seed: int = 0, init=None) -> MassSolution:
    """Multi-start coordinate descent; returns the best first-order point found.

    Starts run in the order: all-zero, all-R, ``init`` (if given), then
    ``starts`` seeded uniform draws. Ties keep the earliest start.
    """
    l = problem.size
    if tol is None:
        tol = 1e-12 * (1.0 + problem.F_norm())
    if max_sweeps is None:
        max_sweeps = max(10 * l, 10)
    cands = [np.zeros(l), np.full(l, problem.R)]
    if init is not None:
        cands.extend(np.atleast_2d(np.asarray(init, dtype=float)))
    rng = np.random.default_rng(seed)
    cands.extend(rng.uniform(0.0, problem.R, size=(int(starts), l)))
    best = None
    locals_ = []
    for k, m0 in enumerate(cands):
        start_obj = problem.objective(np.where(problem.free, np.clip(m0, 0, problem.R), 0.0))
        m, sweeps, ok = coordinate_descent(problem.G.entries, problem.F, problem.R, m0, tol, max_sweeps)
        obj = problem.objective(m)
        assert obj <= start_obj + 1e-9 * (1.0 + abs(start_obj))
        locals_.append(obj)
        if best is None or obj < best[1]:
            best = (m, obj, sweeps, ok, k)
    m, obj, sweeps, ok, k = best
    _, res = kkt_residual(problem, m)
    active = np.flatnonzero((m <= BOUNDARY_BAND) | (m >= problem.R - BOUNDARY_BAND))
    return MassSolution(masses=m, objective=obj, kkt_residual=res, active_set=active,
                        iterations=sweeps, converged=ok, start_index=k, local_objectives=locals_)


@dataclass(frozen=True)
class Infeasible:
    """Interior stationary point not strictly inside the box."""

    v: np.ndarray
    indices: tuple


def interior_linear_solve(problem: MassProblem, band: float = BOUNDARY_BAND, max_cond: float = 1e12):
    """Solve G v = -N f on the free nodes; return v if it lies strictly in (0, R)."""
    fr = problem.free
    G = problem.G.entries[np.ix_(fr, fr)]
    rhs = -problem.N * problem.fvals[fr]
    if G.shape[0] == 0:
        raise SingularMatrix("no free nodes")
    cond = np.linalg.cond(G)
    if not np.isfinite(cond) or cond > max_cond:
        raise SingularMatrix(f"kernel matrix condition number {cond:.3g}")
    vf = np.linalg.solve(G, rhs)
    v = np.zeros(problem.size)
    v[fr] = vf
    bad = np.flatnonzero(fr & ((v <= band) | (v >= problem.R - band)))
    if len(bad):
        return Infeasible(v=v, indices=tuple(int(i) for i in bad))
    return v


def brute_force_masses(problem: MassProblem, grid_steps: int) -> MassSolution:
    """Exhaustive minimum over the mass grid {0, R/s, ..., R}^l (first minimizer in lexicographic order)."""
    l = problem.size
    s = int(grid_steps)
    if l > 4 or s > 200:
        raise ProblemTooLarge(f"brute force limited to l <= 4 and s <= 200 (got l={l}, s={s})")
    if s < 1:
        raise ValueError("grid_steps must be positive")
    levels = np.linspace(0.0, problem.R, s + 1)
    G = np.where(np.outer(problem.free, problem.free), problem.G.entries, 0.0)
    F = np.where(problem.free, problem.F, 0.0)
    tail = min(l, 2)
    mesh = np.array(list(itertools.product(levels, repeat=tail))).reshape(-1, tail)
    best_obj, best_m = math.inf, None
    for head in itertools.product(range(s + 1), repeat=l - tail):
        M = np.empty((len(mesh), l))
        M[:, : l - tail] = levels[list(head)] if head else 0.0
        M[:, l - tail:] = mesh
        M[:, ~problem.free] = 0.0
        vals = np.einsum("bi,ij,bj->b", M, G, M) + M @ F
        k = int(np.argmin(vals))
        if vals[k] < best_obj:
            best_obj, best_m = float(vals[k]), M[k].copy()
    _, res = kkt_residual(problem, best_m)
    active = np.flatnonzero((best_m <= BOUNDARY_BAND) | (best_m >= problem.R - BOUNDARY_BAND))
    return MassSolution(masses=best_m, objective=problem.objective(best_m), kkt_residual=res,
                        active_set=active, iterations=0)

"""Free-position problem e_N: optimize positions on a candidate grid and masses in [0, R].

Alternates a mass step (bang-bang coordinate descent at fixed positions) with a
position step in which each particle moves to the grid point minimizing its
partial energy. Both steps never increase the energy.
"""
from __future__ import annotations

import itertools
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import GridTooSmall, ProblemTooLarge
from .field import ExternalField
from .kernel import GreenDomain, find_duplicate, green_matrix
from .massqp import box_objective, coordinate_descent
from .measure import WeightedConfiguration, discrete_energy

_KERNEL_CACHE: dict = {}
_CACHE_LIMIT = 4


def _grid_kernel(domain: GreenDomain, z: np.ndarray) -> np.ndarray:
    key = (domain.name, z.tobytes())
    G = _KERNEL_CACHE.get(key)
    if G is None:
        G = green_matrix(domain, z, z, diagonal=0.0)
        G = np.triu(G, 1)
        G = G + G.T
        G.setflags(write=False)
        if len(_KERNEL_CACHE) >= _CACHE_LIMIT:
            _KERNEL_CACHE.pop(next(iter(_KERNEL_CACHE)))
        _KERNEL_CACHE[key] = G
    return G


def thread_count() -> int:
    try:
        return max(1, int(os.environ.get("GREENEQ_THREADS", "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class FreeProblem:
    domain: GreenDomain
    K_grid: np.ndarray
    f: ExternalField
    N: int
    R: float

    def __post_init__(self):
        z = np.atleast_1d(np.asarray(self.K_grid, dtype=complex)).ravel().copy()
        if len(z) < self.N:
            raise GridTooSmall(f"grid has {len(z)} points, need at least N={self.N}")
        if self.N < 1:
            raise ValueError("N must be positive")
        if not self.R > 0:
            raise ValueError("R must be positive")
        self.domain.check(z)
        if not np.all(self.f.K.contains(z)):
            raise ValueError("grid points must lie on K")
        if find_duplicate(z) is not None:
            raise ValueError("grid points must be pairwise distinct")
        z.setflags(write=False)
        object.__setattr__(self, "K_grid", z)

    @property
    def kernel(self) -> np.ndarray:
        return _grid_kernel(self.domain, self.K_grid)

    @property
    def fgrid(self) -> np.ndarray:
        return self.f.values(self.K_grid)

    def energy(self, idx, m) -> float:
        """E_{N,f} for particles at grid indices idx with masses m."""
        idx = np.asarray(idx, dtype=int)
        m = np.asarray(m, dtype=float)
        Gs = self.kernel[np.ix_(idx, idx)].copy()
        same = idx[:, None] == idx[None, :]
        np.fill_diagonal(same, False)
        Gs[same] = np.inf
        return box_objective(Gs, 2.0 * self.N * self.fgrid[idx], m)

    def snap(self, points) -> np.ndarray:
        """Index of the nearest grid point for each point."""
        p = np.asarray(points, dtype=complex).ravel()
        return np.argmin(np.abs(p[:, None] - self.K_grid[None, :]), axis=1)


@dataclass
class FreeSolution:
    configuration: WeightedConfiguration
    objective: float
    trace: list
    restarts_used: int
    converged: bool = True
    indices: np.ndarray = None
    restart_objectives: list = field(default_factory=list)

    def near_optimal(self, tol: float = 1e-9) -> list:
        """Restart indices whose objective is within tol of the best."""
        return [k for k, o in enumerate(self.restart_objectives)
                if o <= self.objective + tol * (1.0 + abs(self.objective))]


class _Run:
    """State of one alternating descent run."""

    def __init__(self, problem: FreeProblem, idx, m, tol: float):
        self.p = problem
        self.G = problem.kernel
        self.fN = problem.N * problem.fgrid
        self.idx = np.asarray(idx, dtype=int).copy()
        self.m = np.asarray(m, dtype=float).copy()
        self.tol = tol
        n = len(problem.K_grid)
        self.occ = np.zeros(n, dtype=int)  # positive-mass particles per grid point
        # a particle with positive mass may not sit where f is infinite
        self.m[~np.isfinite(self.fN[self.idx])] = 0.0
        self._resolve_collisions()
        np.add.at(self.occ, self.idx[self.m > 0], 1)

    def _resolve_collisions(self):
        seen = set()
        for i in range(len(self.idx)):
            if self.m[i] > 0:
                if self.idx[i] in seen:
                    self.m[i] = 0.0
                else:
                    seen.add(self.idx[i])

    def energy(self) -> float:
        return self.p.energy(self.idx, self.m)

    def mass_step(self):
        idx = self.idx
        Gs = self.G[np.ix_(idx, idx)].copy()
        same = idx[:, None] == idx[None, :]
        np.fill_diagonal(same, False)
        Gs[same] = np.inf
        F = 2.0 * self.fN[idx]
        R = self.p.R
        ftol = 1e-12 * (1.0 + float(np.max(np.abs(F[np.isfinite(F)]), initial=0.0)))
        sweeps = max(10 * len(idx), 10)
        best_m, best_obj = self.m, box_objective(Gs, F, self.m)
        for m0 in (self.m, np.zeros(len(idx)), np.full(len(idx), R)):
            m, _, _ = coordinate_descent(Gs, F, R, m0, ftol, sweeps)
            obj = box_objective(Gs, F, m)
            if obj < best_obj:
                best_m, best_obj = m, obj
        self.m = best_m.copy()
        self.occ[:] = 0
        np.add.at(self.occ, idx[self.m > 0], 1)

    def position_step(self):
        G, fN, idx, m, occ = self.G, self.fN, self.idx, self.m, self.occ
        pos = m > 0
        phi = G[:, idx[pos]] @ m[pos] if np.any(pos) else np.zeros(len(fN))
        for i in range(len(idx)):
            cur = idx[i]
            if m[i] > 0:
                part = phi - m[i] * G[:, cur] + fN
                blocked = occ > 0
                blocked[cur] = occ[cur] > 1
                vals = np.where(blocked, np.inf, part)
                k = int(np.argmin(vals))
                # move only on strict improvement so the energy never increases
                if vals[k] < part[cur] - 1e-14 * (1.0 + abs(part[cur])):
                    phi += m[i] * (G[:, k] - G[:, cur])
                    occ[cur] -= 1
                    occ[k] += 1
                    idx[i] = k
            else:
                vals = np.where(occ > 0, np.inf, phi + fN)
                k = int(np.argmin(vals))
                if np.isfinite(vals[k]):
                    idx[i] = k


def _run(problem: FreeProblem, idx0, m0, tol: float, max_rounds: int):
    r = _Run(problem, idx0, m0, tol)
    trace = [r.energy()]
    converged = False
    for _ in range(max_rounds):
        before = trace[-1]
        r.mass_step()
        e1 = r.energy()
        assert e1 <= before + 1e-9 * (1.0 + abs(before)), "mass step increased the energy"
        r.position_step()
        e2 = r.energy()
        assert e2 <= e1 + 1e-9 * (1.0 + abs(e1)), "position step increased the energy"
        trace.append(e2)
        if before - e2 <= tol * (1.0 + abs(e2)):
            converged = True
            break
    # final mass step so the returned masses are optimal for the final positions
    r.mass_step()
    e = r.energy()
    assert e <= trace[-1] + 1e-9 * (1.0 + abs(trace[-1]))
    trace.append(e)
    return r.idx.copy(), r.m.copy(), e, trace, converged


def solve_free(problem: FreeProblem, restarts: int = 8, max_rounds: int = 200, tol: float = 1e-10,
               seed: int = 0, init=None) -> FreeSolution:
    """Best configuration over warm starts and seeded random restarts.

    ``init`` is an optional list of (points, masses) pairs; points are snapped
    to the grid. Starts are ordered: inits first, then random draws. The result
    is the lowest energy, ties going to the earliest start.
    """
    n = len(problem.K_grid)
    N = problem.N
    starts = []
    for pts, ms in (init or []):
        pts = np.asarray(pts, dtype=complex).ravel()
        ms = np.asarray(ms, dtype=float).ravel()
        if len(pts) != N or len(ms) != N:
            raise ValueError("warm start must have exactly N particles")
        starts.append((problem.snap(pts), np.clip(ms, 0.0, problem.R)))
    rng = np.random.default_rng(seed)
    for _ in range(int(restarts)):
        idx = np.sort(rng.choice(n, size=N, replace=False))
        starts.append((idx, np.full(N, problem.R)))
    if not starts:
        starts.append((np.arange(N), np.zeros(N)))

    def job(s):
        return _run(problem, s[0], s[1], tol, max_rounds)

    workers = min(thread_count(), len(starts))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(job, starts))
    else:
        results = [job(s) for s in starts]
    best = min(range(len(results)), key=lambda k: (results[k][2], k))
    idx, m, e, trace, ok = results[best]
    cfg = WeightedConfiguration(problem.K_grid[idx], m, problem.R, normalization=N)
    return FreeSolution(configuration=cfg, objective=e, trace=trace, restarts_used=len(starts),
                        converged=ok, indices=idx, restart_objectives=[r[2] for r in results])


def brute_force_free(problem: FreeProblem, mass_steps: int) -> FreeSolution:
    """Exact optimum over position N-tuples from the grid and masses in {0, R/s, ..., R}."""
    N, n, s = problem.N, len(problem.K_grid), int(mass_steps)
    if N > 3 or n > 15 or s > 50:
        raise ProblemTooLarge(f"brute force limited to N <= 3, |grid| <= 15, s <= 50 (got {N}, {n}, {s})")
    levels = np.linspace(0.0, problem.R, s + 1)
    M = np.array(list(itertools.product(levels, repeat=N))).reshape(-1, N)
    fN = 2.0 * N * problem.fgrid
    G = problem.kernel
    best = (math.inf, None, None)
    # energy is symmetric under relabeling, so unordered tuples suffice
    for tup in itertools.combinations_with_replacement(range(n), N):
        idx = np.array(tup)
        F = fN[idx]
        lin = M @ np.where(np.isfinite(F), F, 0.0)
        lin = np.where((M[:, ~np.isfinite(F)] > 0).any(axis=1), np.inf, lin)
        pair = np.zeros(len(M))
        for a in range(N):
            for b in range(a + 1, N):
                prod = M[:, a] * M[:, b]
                if idx[a] == idx[b]:
                    pair = np.where(prod > 0, np.inf, pair)
                else:
                    pair = pair + 2.0 * G[idx[a], idx[b]] * prod
        vals = pair + lin
        k = int(np.argmin(vals))
        if vals[k] < best[0]:
            best = (float(vals[k]), idx, M[k].copy())
    obj, idx, m = best
    cfg = WeightedConfiguration(problem.K_grid[idx], m, problem.R, normalization=N)
    return FreeSolution(configuration=cfg, objective=obj, trace=[obj], restarts_used=0, indices=idx)


@dataclass
class TraceRow:
    N: int
    e_N: float
    e_N_over_N2: float
    restarts: int
    converged: bool


def energy_scaling_trace(domain: GreenDomain, f: ExternalField, R: float, N_list, grid,
                         restarts: int = 8, seed: int = 0, tol: float = 1e-10, extra_init=None):
    """Solve e_N along an increasing N list on one shared grid.

    Each N is warm-started from the previous solution plus one zero-mass
    particle (when N grows by one) or the previous solution padded with
    zero-mass particles, together with any ``extra_init[N]`` starts.
    Returns (rows, solutions).
    """
    N_list = [int(N) for N in N_list]
    if any(b <= a for a, b in zip(N_list, N_list[1:])):
        raise ValueError("N list must be increasing")
    grid = np.asarray(grid, dtype=complex)
    if len(grid) < 4 * N_list[-1]:
        raise GridTooSmall(f"shared grid needs at least 4 N = {4 * N_list[-1]} points")
    rows, sols = [], {}
    prev = None
    for N in N_list:
        prob = FreeProblem(domain, grid, f, N, R)
        inits = []
        if prev is not None:
            pad = N - prev.configuration.size
            pts = np.concatenate([prev.configuration.points, np.full(pad, grid[0])])
            ms = np.concatenate([prev.configuration.masses, np.zeros(pad)])
            inits.append((pts, ms))
        if extra_init and N in extra_init:
            inits.extend(extra_init[N])
        sol = solve_free(prob, restarts=restarts, tol=tol, seed=seed + N, init=inits)
        check = discrete_energy(domain, f, sol.configuration)
        assert abs(check - sol.objective) <= 1e-9 * (1.0 + abs(check))
        rows.append(TraceRow(N, sol.objective, sol.objective / N ** 2, sol.restarts_used, sol.converged))
        sols[N] = sol
        prev = sol
    return rows, sols

"""Greedy f-energy sequences on a candidate set A.

Step N picks (a_N, m_N) minimizing m * chi(z) over A x [0, R], where
chi(z) = sum_{k<N} m_k g(z, a_k) + (N - 1) f(z). The product is affine in m,
so the optimal mass is R when min chi < 0 and 0 otherwise.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyA, EmptyGrid, EmptyHistory
from .field import ExternalField
from .kernel import GreenDomain, green_eval
from .measure import WeightedConfiguration, discrete_energy

ZERO_BAND = 1e-12
CHECK_EVERY = 16


@dataclass
class GreedyState:
    domain: GreenDomain
    f: ExternalField
    R: float
    A_grid: np.ndarray
    history: list = field(default_factory=list)  # (grid index, mass)

    def __post_init__(self):
        self.A_grid = np.atleast_1d(np.asarray(self.A_grid, dtype=complex)).ravel()
        if len(self.A_grid) == 0:
            raise EmptyGrid("candidate set A is empty")
        self.domain.check(self.A_grid)
        self.fA = self.f.values(self.A_grid)
        self.potential = np.zeros(len(self.A_grid))  # sum_k m_k g(z, a_k)
        self.occupied = np.zeros(len(self.A_grid), dtype=bool)
        self.pair = 0.0  # sum_{i != j} m_i m_j g(a_i, a_j)
        self.sum_mf = 0.0  # sum_k m_k f(a_k), with 0 * inf = 0
        hist, self.history = self.history, []
        for k, m in hist:
            self.push(k, m)

    @property
    def N(self) -> int:
        return len(self.history)

    def index_of(self, z) -> int:
        d = np.abs(self.A_grid - complex(z))
        k = int(np.argmin(d))
        if d[k] > 1e-12:
            raise ValueError(f"point {z} is not in the candidate set")
        return k

    def push(self, k: int, m: float):
        if not 0.0 <= m <= self.R:
            raise ValueError("mass must lie in [0, R]")
        if m > 0:
            if self.occupied[k]:
                raise ValueError("positive mass on an occupied point")
            self.pair += 2.0 * m * self.potential[k]
            self.sum_mf += m * self.fA[k]
            with np.errstate(divide="ignore"):
                g = np.asarray(green_eval(self.domain, self.A_grid, self.A_grid[k]))
            g[k] = 0.0
            self.potential += m * g
            self.occupied[k] = True
        self.history.append((int(k), float(m)))

    def chi_vector(self) -> np.ndarray:
        if not self.history:
            raise EmptyHistory("chi needs at least one previous step")
        with np.errstate(invalid="ignore"):
            v = self.potential + self.N * self.fA
        v[self.occupied] = math.inf
        return v

    def energy(self) -> float:
        """E_{N,f} of the current history."""
        return self.pair + 2.0 * self.N * self.sum_mf

    def configuration(self) -> WeightedConfiguration:
        idx = [k for k, _ in self.history]
        m = [m for _, m in self.history]
        return WeightedConfiguration(self.A_grid[idx], m, self.R, normalization=max(self.N, 1))


def chi(state: GreedyState, z) -> float:
    """sum_{k<N} m_k g(z, a_k) + (N - 1) f(z) for z in A."""
    return float(state.chi_vector()[state.index_of(z)])


def greedy_step(state: GreedyState):
    """Next (a_N, m_N, chi*) without modifying the state."""
    v = state.chi_vector()
    k = int(np.argmin(v))
    cstar = float(v[k])
    m = state.R if cstar < -ZERO_BAND else 0.0
    return complex(state.A_grid[k]), m, cstar


@dataclass
class GreedyRow:
    N: int
    a_N: complex
    m_N: float
    chi_star: float
    E_over_N2: float
    mean_mf: float
    pair_energy_over_N2: float

    @property
    def U_over_N(self) -> float:
        """U_{N,f}(a_N, m_N) / N = m_N chi* / N (0 when m_N = 0)."""
        return 0.0 if self.m_N == 0 else self.m_N * self.chi_star / self.N


def greedy_run(domain: GreenDomain, f: ExternalField, R: float, A_grid, N_max: int,
               seed_point=None, seed_mass: float | None = None):
    """Run the greedy recursion to N_max; returns (rows, final state)."""
    state = GreedyState(domain, f, R, A_grid)
    if seed_point is None:
        k0 = int(np.argmin(state.fA))
    else:
        k0 = state.index_of(seed_point)
    m0 = R if seed_mass is None else float(seed_mass)
    if m0 > 0 and not np.isfinite(state.fA[k0]):
        raise ValueError("seed mass must be zero where f is infinite")
    state.push(k0, m0)
    rows = [_row(state, math.nan)]
    for N in range(2, int(N_max) + 1):
        a, m, cstar = greedy_step(state)
        state.push(state.index_of(a), m)
        rows.append(_row(state, cstar))
        if N % CHECK_EVERY == 0:
            ref = discrete_energy(domain, f, state.configuration())
            assert abs(ref - state.energy()) <= 1e-9 * max(1.0, abs(ref)), "incremental energy drifted"
    return rows, state


def _row(state: GreedyState, cstar: float) -> GreedyRow:
    N = state.N
    k, m = state.history[-1]
    return GreedyRow(N=N, a_N=complex(state.A_grid[k]), m_N=m, chi_star=cstar,
                     E_over_N2=state.energy() / N ** 2, mean_mf=state.sum_mf / N,
                     pair_energy_over_N2=state.pair / N ** 2)


def leave_one_out_potential(domain: GreenDomain, mu: WeightedConfiguration, z) -> np.ndarray:
    """Green potential at z, dropping the atom located exactly at z (if any)."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    pos = mu.masses > 0
    out = np.zeros(len(z))
    if np.any(pos):
        with np.errstate(divide="ignore"):
            G = np.asarray(green_eval(domain, z[:, None], mu.points[pos][None, :]))
        G[np.isinf(G)] = 0.0
        out = G @ mu.masses[pos] / mu.normalization
    return out


def estimate_A(domain: GreenDomain, f: ExternalField, mu_star, C_f: float, K_grid,
               slack: float | None = None, scale: float = 1.0) -> np.ndarray:
    """Grid points where U^{mu*} + f <= C_f + slack.

    ``mu_star`` is either a discrete configuration (evaluated with the atom at
    the point itself left out) or any object with a ``potential(z)`` method.
    """
    K_grid = np.atleast_1d(np.asarray(K_grid, dtype=complex))
    if slack is None:
        slack = 1e-3 * scale
    if slack == math.inf:
        return K_grid.copy()
    if isinstance(mu_star, WeightedConfiguration):
        if mu_star.total_mass <= 0:
            raise ValueError("estimate_A needs a nonzero equilibrium estimate")
        U = leave_one_out_potential(domain, mu_star, K_grid)
    else:
        U = np.asarray(mu_star.potential(K_grid))
    r = U + f.values(K_grid)
    keep = r <= C_f + slack
    if not np.any(keep):
        raise EmptyA("no grid point satisfies the potential condition")
    return K_grid[keep]


"""Numerical checks of first-order conditions, bounds and inequality chains."""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.integrate import quad

from .errors import GridTooSmall, ZeroMeasure
from .field import ExternalField
from .geometry import Arc, CompactSet
from .greedy import leave_one_out_potential
from .kernel import GreenDomain, green_matrix
from .measure import PartitionedSet, PiecewiseDensity, WeightedConfiguration, green_potential, pair_energy


def tolerance_scale(*values) -> float:
    """1 + max |value| over the finite inputs."""
    finite = [abs(v) for v in values if v is not None and math.isfinite(v)]
    return 1.0 + (max(finite) if finite else 0.0)


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, float)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, complex):
        return [_jsonable(x.real), _jsonable(x.imag)]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    return x


def digest(inputs) -> str:
    blob = json.dumps(_jsonable(inputs), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


@dataclass
class CheckResult:
    check: str
    inputs_digest: str
    values: dict
    passed: bool
    tolerance: float

    def to_json(self) -> dict:
        return {"check": self.check, "inputs_digest": self.inputs_digest,
                "values": _jsonable(self.values), "pass": bool(self.passed),
                "tolerance": _jsonable(self.tolerance)}


# ---------------------------------------------------------------------------
# bounds


def kappa_min(domain: GreenDomain, K_grid) -> float:
    """min over distinct grid pairs of g."""
    z = np.atleast_1d(np.asarray(K_grid, dtype=complex)).ravel()
    if len(z) < 2:
        raise GridTooSmall("kappa needs at least two grid points")
    best = math.inf
    for start in range(0, len(z), 1024):
        G = green_matrix(domain, z[start:start + 1024], z)
        best = min(best, float(np.min(G)))
    return best


@dataclass
class BoundsReport:
    beta: float
    kappa: float
    lower_bound: float
    R_star: float
    v_estimate: float | None = None
    zero_regime: bool = False


def energy_bounds(beta: float, kappa: float, R: float, v_estimate: float | None = None) -> BoundsReport:
    if not kappa > 0:
        raise ValueError("kappa must be positive")
    if beta >= 0:
        return BoundsReport(beta, kappa, 0.0, 0.0, v_estimate, zero_regime=True)
    return BoundsReport(beta, kappa, max(2 * beta * R, -beta * beta / kappa),
                        min(R, -2 * beta / kappa), v_estimate)


def estimate_Cf(domain: GreenDomain, mu: WeightedConfiguration, f: ExternalField, R: float,
                tol: float = 1e-9) -> float:
    """(1/R)(off-diagonal energy + int f dmu); exactly 0 when the mass is below R."""
    if mu.total_mass < R - tol:
        return 0.0
    n = mu.normalization
    pos = mu.masses > 0
    fint = float(mu.masses[pos] @ f.values(mu.points[pos])) / n
    return (pair_energy(domain, mu.points, mu.masses) / n ** 2 + fint) / R


# ---------------------------------------------------------------------------
# first-order conditions


@dataclass
class FrostmanReport:
    C_f_estimate: float
    min_residual_offsupport: float
    max_residual_onsupport: float
    grid_size: int
    support_mass_threshold: float
    support_condition_ok: bool = True
    support_violations: list = field(default_factory=list)
    tolerance: float = math.nan

    @property
    def passed(self) -> bool:
        return (self.min_residual_offsupport >= -self.tolerance
                and self.max_residual_onsupport <= self.tolerance
                and self.support_condition_ok)


def frostman_check(domain: GreenDomain, mu: WeightedConfiguration, f: ExternalField, K_grid, C_f: float,
                   threshold: float | None = None, kappa: float | None = None,
                   tolerance: float = 1e-2) -> FrostmanReport:
    """Residuals r = U + f - C_f off and on the support of a discrete measure.

    On atoms the potential leaves out the atom itself (its own mass carries no
    self-interaction in the discrete energy). Off the support, grid points that
    coincide with a positive atom are skipped.
    """
    K_grid = np.atleast_1d(np.asarray(K_grid, dtype=complex))
    if threshold is None:
        threshold = 1e-9 * mu.R
    sup = mu.masses > threshold
    atoms = mu.points[sup]
    if len(atoms):
        r_on = leave_one_out_potential(domain, mu, atoms) + f.values(atoms) - C_f
        on_max = float(np.max(r_on))
    else:
        on_max = -math.inf
    pos_atoms = mu.points[mu.masses > 0]
    if len(pos_atoms):
        d = np.min(np.abs(K_grid[:, None] - pos_atoms[None, :]), axis=1)
        off = K_grid[d > 1e-12]
    else:
        off = K_grid
    if len(off):
        r_off = green_potential(domain, mu, off) + f.values(off) - C_f
        off_min = float(np.min(r_off))
    else:
        off_min = math.inf
    ok, bad = True, []
    if len(atoms):
        fa = f.values(atoms)
        if kappa is None:
            kappa = kappa_min(domain, K_grid) if len(K_grid) > 1 else 0.0
        bound = C_f - kappa * mu.total_mass
        viol = ~(fa <= bound + tolerance)
        ok = not np.any(viol)
        bad = [complex(a) for a in atoms[viol]]
    return FrostmanReport(C_f_estimate=C_f, min_residual_offsupport=off_min,
                          max_residual_onsupport=on_max, grid_size=len(K_grid),
                          support_mass_threshold=threshold, support_condition_ok=ok,
                          support_violations=bad, tolerance=tolerance)


@dataclass
class InequalityEntry:
    name: str
    lhs: float
    rhs: float
    tolerance: float
    passed: bool


def inequality_suite(e_trace: dict, d_trace: dict, greedy_trace: dict | None = None,
                     v_estimates: dict | None = None, scale: float = 1.0) -> list:
    """Instantiate the chains e_{l_N} <= d_N <= 0, e_N/N^2 <= v_f, v_f <= v_{f,lambda} <= 0.

    e_trace maps N to e_N, d_trace maps N to (l_N, d_N), greedy_trace maps N to
    the greedy energy E_N, v_estimates may hold "v_f" and "v_f_lambda". All
    comparisons are made on energies divided by the square of their
    normalization, with tolerance 1e-6 * scale.
    """
    tol = 1e-6 * scale
    out = []

    def add(name, lhs, rhs):
        out.append(InequalityEntry(name, float(lhs), float(rhs), tol, bool(lhs <= rhs + tol)))

    v = (v_estimates or {}).get("v_f")
    vl = (v_estimates or {}).get("v_f_lambda")
    for N, (l_N, d) in sorted(d_trace.items()):
        add(f"d_N<=0[N={N}]", d / l_N ** 2, 0.0)
        if l_N in e_trace:
            add(f"e_lN<=d_N[N={N}]", e_trace[l_N] / l_N ** 2, d / l_N ** 2)
    for N, e in sorted(e_trace.items()):
        add(f"e_N<=0[N={N}]", e / N ** 2, 0.0)
        if v is not None:
            add(f"e_N/N2<=v_f[N={N}]", e / N ** 2, v)
    for N, E in sorted((greedy_trace or {}).items()):
        if N in e_trace:
            add(f"e_N<=greedy[N={N}]", e_trace[N] / N ** 2, E / N ** 2)
    if v is not None and vl is not None:
        add("v_f<=v_f_lambda", v, vl)
    if vl is not None:
        add("v_f_lambda<=0", vl, 0.0)
    if v is not None:
        add("v_f<=0", v, 0.0)
    return out


# ---------------------------------------------------------------------------
# dependence on R


@dataclass
class ScanReport:
    rows: list  # (R, v_hat, mass)
    L_est: float
    monotone: bool
    lipschitz_ok: bool
    saturation_threshold: float | None
    saturated_mass_spread: float | None

    def passed(self, mass_tol: float = 1e-3) -> bool:
        spread_ok = self.saturated_mass_spread is None or self.saturated_mass_spread <= mass_tol
        return self.monotone and self.lipschitz_ok and spread_ok


def continuity_scan_R(solve, R_grid, tol: float = 1e-6, saturation_threshold: float | None = None) -> ScanReport:
    """Scan an R -> (v_hat(R), mass) solver over an increasing grid.

    ``solve`` is a callable returning an object with ``value`` and ``mass``.
    """
    R_grid = [float(r) for r in R_grid]
    if len(R_grid) < 5:
        raise GridTooSmall("R scan needs at least 5 points")
    if any(b <= a for a, b in zip(R_grid, R_grid[1:])):
        raise ValueError("R grid must be increasing")
    rows = []
    for R in R_grid:
        eq = solve(R)
        rows.append((R, float(eq.value), float(eq.mass)))
    v = np.array([r[1] for r in rows])
    Rs = np.array(R_grid)
    dv = np.diff(v)
    monotone = bool(np.all(dv <= tol))
    slopes = np.abs(dv) / np.diff(Rs)
    L_est = float(np.max(slopes))
    # each jump must respect the Lipschitz estimate of its neighbors
    lip_ok = bool(np.all(np.abs(dv) <= L_est * np.diff(Rs) + tol))
    spread = None
    if saturation_threshold is not None:
        sat = [r[2] for r in rows if r[0] >= saturation_threshold]
        if sat:
            spread = float(max(sat) - min(sat))
    return ScanReport(rows, L_est, monotone, lip_ok, saturation_threshold, spread)


# ---------------------------------------------------------------------------
# reference measure regularity


def _G_log(u):
    """Antiderivative of log(1/u) on u >= 0: u (1 - log u)."""
    u = np.asarray(u, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = u * (1.0 - np.log(u))
    return np.where(u <= 0, 0.0, out)


def _arc_window(p: Arc, x: complex, eps: float) -> list:
    """Arclength intervals of the arc where |p(t) - x| < eps."""
    w = x - p.center
    rho, r = abs(w), p.radius
    if rho == 0.0:
        return [(0.0, p.length)] if r < eps else []
    cos_a = (r * r + rho * rho - eps * eps) / (2 * r * rho)
    if cos_a >= 1.0:
        return []
    if cos_a <= -1.0:
        return [(0.0, p.length)]
    alpha = math.acos(cos_a)
    phi = p.theta0 + (math.atan2(w.imag, w.real) - p.theta0) % (2 * math.pi)
    out = []
    for c in (phi - 2 * math.pi, phi):
        lo, hi = max(p.theta0, c - alpha), min(p.theta1, c + alpha)
        if hi > lo:
            out.append(((lo - p.theta0) * r, (hi - p.theta0) * r))
    return out


def _local_log_integral(K: CompactSet, x_s: float, eps: float) -> float:
    """int over {t in K: |t - x| < eps} of log(1/|x - t|) d lambda(t), lambda = normalized length."""
    x = complex(K.point(np.array([x_s]))[0])
    total = 0.0
    for p in K.pieces:
        if isinstance(p, Arc):
            loc = float(p.locate(x))
            for lo, hi in _arc_window(p, x, eps):
                if not math.isnan(loc) and lo <= loc <= hi:
                    # log(1/chord) = log(1/|u|) - log(chord/|u|); the second term is smooth
                    total += float(_G_log(loc - lo) + _G_log(hi - loc))
                    total -= quad(lambda t: float(p.chord_log_ratio(t, loc)), lo, hi, epsabs=1e-13)[0]
                else:
                    total += quad(lambda t: -math.log(abs(complex(p.point(t)) - x)), lo, hi, epsabs=1e-13)[0]
        else:
            xr = x.real
            lo = max(p.a, xr - eps)
            hi = min(p.b, xr + eps)
            if hi <= lo:
                continue
            if lo <= xr <= hi:
                total += float(_G_log(xr - lo) + _G_log(hi - xr))
            else:
                u0, u1 = sorted((abs(xr - lo), abs(xr - hi)))
                total += float(_G_log(u1) - _G_log(u0))
    return total / K.length


def lambda_regularity(P_: PartitionedSet | CompactSet, eps_list, samples: int = 2001) -> list:
    """[(eps, sup_x local log integral)] for the normalized length measure on K."""
    K = P_.K if isinstance(P_, PartitionedSet) else P_
    eps_list = [float(e) for e in eps_list]
    if any(e <= 0 for e in eps_list) or any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise ValueError("eps list must be positive and decreasing")
    xs = np.linspace(0.0, K.length, samples)
    xs = np.union1d(xs, K.offsets)
    out = []
    for eps in eps_list:
        # within a piece the integral is largest where the eps window fits inside K
        cand = list(xs)
        for i, p in enumerate(K.pieces):
            if p.length > 2 * eps:
                cand.append(K.offsets[i] + 0.5 * p.length)
        vals = [_local_log_integral(K, s, eps) for s in cand]
        out.append((eps, float(max(vals))))
    return out


# ---------------------------------------------------------------------------
# upper-constrained problem


@dataclass
class EssInfReport:
    sup_on_support: float
    essinf_on_rho: float
    passed: bool
    tolerance: float


def constrained_ess_inf_check(domain: GreenDomain, mu_lam: WeightedConfiguration, f: ExternalField,
                              threshold: float | None = None, scale: float = 1.0) -> EssInfReport:
    """sup of U + f over the support versus its min where R - m_j (residual capacity) is positive."""
    if mu_lam.total_mass <= 0:
        raise ZeroMeasure("the constrained equilibrium estimate is the zero measure")
    R = mu_lam.R
    if threshold is None:
        threshold = 1e-6 * R
    z = mu_lam.points
    r = leave_one_out_potential(domain, mu_lam, z) + f.values(z)
    on = mu_lam.masses > threshold
    rho = (R - mu_lam.masses) > threshold
    sup_on = float(np.max(r[on])) if np.any(on) else -math.inf
    inf_rho = float(np.min(r[rho])) if np.any(rho) else math.inf
    tol = 1e-2 * scale
    return EssInfReport(sup_on, inf_rho, bool(sup_on <= inf_rho + tol), tol)


# ---------------------------------------------------------------------------
# logarithmic energy convergence


def _int_u_pow_log(j: int, u):
    """Antiderivative of u^j log|u|."""
    u = np.asarray(u, dtype=float)
    k = j + 1
    with np.errstate(divide="ignore", invalid="ignore"):
        out = u ** k * (np.log(np.abs(u)) / k - 1.0 / k ** 2)
    return np.where(u == 0, 0.0, out)


def _shift_poly(c, x0):
    """Coefficients of p(x0 + u) in u."""
    c = np.asarray(c, dtype=float)
    out = np.zeros(len(c))
    for k, ck in enumerate(c):
        for j in range(k + 1):
            out[j] += ck * math.comb(k, j) * x0 ** (k - j)
    return out


def _inner_log(rho: PiecewiseDensity, s: float) -> float:
    """int log|x(s) - x(t)| rho(t) dt over the density's support (arclength t)."""
    K = rho.K
    x = complex(K.point(np.array([s]))[0])
    total = 0.0
    for k, c in enumerate(rho.coeffs):
        t0, t1 = rho.breaks[k], rho.breaks[k + 1]
        if t1 <= t0:
            continue
        ip = int(np.searchsorted(K.offsets, 0.5 * (t0 + t1), side="right") - 1)
        p = K.pieces[ip]
        if isinstance(p, Arc):
            def integrand(t):
                d = abs(p.point(t - K.offsets[ip]) - x)
                return math.log(d) * P.polyval(t, c) if d > 0 else 0.0

            pts = [s] if t0 < s < t1 else None
            val, _ = quad(integrand, t0, t1, points=pts, limit=200, epsabs=1e-12)
            total += val
            continue
        # on a segment x(t) = shift + t, so |x - x(t)| = |cc - t|
        shift = p.a - K.offsets[ip]
        if abs(x.imag) > 0:
            val, _ = quad(lambda t: math.log(abs(x - (shift + t))) * P.polyval(t, c), t0, t1, epsabs=1e-12)
            total += val
            continue
        cc = x.real - shift
        q = _shift_poly(c, cc)  # rho(cc + u) in powers of u
        u0, u1 = t0 - cc, t1 - cc
        for j, qj in enumerate(q):
            if qj != 0.0:
                total += qj * float(_int_u_pow_log(j, u1) - _int_u_pow_log(j, u0))
    return total


def continuous_log_energy(rho: PiecewiseDensity) -> float:
    """int int log(1/|z - t|) dmu(z) dmu(t) for mu = rho * lambda."""
    L = rho.K.length
    total = 0.0
    for k, c in enumerate(rho.coeffs):
        s0, s1 = rho.breaks[k], rho.breaks[k + 1]
        if s1 <= s0 or np.all(c == 0):
            continue
        val, _ = quad(lambda s: P.polyval(s, c) * _inner_log(rho, s), s0, s1, limit=200, epsabs=1e-10)
        total += val
    return -total / L ** 2


def discrete_log_energy(mu: WeightedConfiguration) -> float:
    """(1/n^2) sum_{i != j} m_i m_j log(1/|x_i - x_j|)."""
    pos = mu.masses > 0
    z, m = mu.points[pos], mu.masses[pos]
    if len(z) < 2:
        return 0.0
    with np.errstate(divide="ignore"):
        Lg = -np.log(np.abs(z[:, None] - z[None, :]))
    np.fill_diagonal(Lg, 0.0)
    return float(m @ Lg @ m) / mu.normalization ** 2


def log_energy_gap(mu_N: WeightedConfiguration, target: PiecewiseDensity) -> float:
    """|discrete off-diagonal log energy of mu_N - continuous log energy of the target|."""
    return abs(discrete_log_energy(mu_N) - continuous_log_energy(target))


def report_json(obj) -> dict:
    """Plain dict of a report dataclass with JSON-safe floats."""
    return _jsonable(asdict(obj))

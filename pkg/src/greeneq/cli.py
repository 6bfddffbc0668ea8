"""Config-driven experiment runner.

Usage: greeneq run CONFIG.json [--seed S] [--out DIR] [--pipeline NAME]

Exit codes: 0 success, 1 input or pipeline error, 2 some verification failed.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import verify as V
from .equilibrium import galerkin_system, solve_ball, solve_upper
from .errors import ConfigParse, GreenEqError, ZeroMeasure
from .field import ExternalField, FieldPiece, field_min
from .freesolve import energy_scaling_trace
from .geometry import Arc, CompactSet, Segment, merge_points
from .greedy import estimate_A, greedy_run
from .kernel import GreenDomain
from .massqp import MassProblem, kkt_residual, solve_masses
from .measure import WeightedConfiguration, build_interval_partition

PIPELINES = ("free", "nodes", "greedy", "constrained", "verify-all", "scan-R")


# ---------------------------------------------------------------------------
# config parsing


def _num(x, key, positive=False, allow_inf=False):
    if isinstance(x, str) and x.lower() in ("inf", "+inf", "infinity") and allow_inf:
        return math.inf
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise ConfigParse(key, f"expected a number, got {x!r}")
    x = float(x)
    if math.isnan(x) or (math.isinf(x) and not allow_inf):
        raise ConfigParse(key, "must be finite")
    if positive and not x > 0:
        raise ConfigParse(key, "must be positive")
    return x


def _piece(desc, key):
    if isinstance(desc, dict) and "arc" in desc:
        a = desc["arc"]
        try:
            c = a["center"]
            th = a["theta"]
            return Arc(complex(_num(c[0], key), _num(c[1], key)), _num(a["radius"], key, positive=True),
                       _num(th[0], key), _num(th[1], key))
        except (KeyError, TypeError, IndexError) as exc:
            raise ConfigParse(key, f"malformed arc {desc!r}") from exc
        except ValueError as exc:
            raise ConfigParse(key, str(exc)) from exc
    if isinstance(desc, (list, tuple)) and len(desc) == 2:
        a, b = _num(desc[0], key), _num(desc[1], key)
        if not b > a:
            raise ConfigParse(key, f"interval [{a}, {b}] needs a < b")
        return Segment(a, b)
    raise ConfigParse(key, f"expected [a, b] or an arc, got {desc!r}")


def _compact(desc, key) -> CompactSet:
    if not isinstance(desc, list) or not desc:
        raise ConfigParse(key, "expected a nonempty list of pieces")
    pieces = [_piece(d, key) for d in desc]
    try:
        return CompactSet(pieces)
    except ValueError as exc:
        raise ConfigParse(key, str(exc)) from exc


def _field(desc, K) -> ExternalField:
    key = "field"
    if isinstance(desc, (int, float)) and not isinstance(desc, bool):
        return ExternalField.constant(K, _num(desc, key))
    if not isinstance(desc, dict):
        raise ConfigParse(key, "expected a number or an object")
    default = _num(desc.get("default", "inf"), key + ".default", allow_inf=True)
    pieces = []
    for p in desc.get("pieces", []):
        if not isinstance(p, dict) or "region" not in p:
            raise ConfigParse(key + ".pieces", f"malformed piece {p!r}")
        region = _piece(p["region"], key + ".pieces.region")
        try:
            if "poly" in p:
                pieces.append(FieldPiece(region, poly=tuple(_num(c, key) for c in p["poly"])))
            else:
                pieces.append(FieldPiece(region, value=_num(p.get("value"), key, allow_inf=True)))
        except ValueError as exc:
            raise ConfigParse(key, str(exc)) from exc
    try:
        return ExternalField(K, pieces, default)
    except ValueError as exc:
        raise ConfigParse(key, str(exc)) from exc


@dataclass
class ExperimentConfig:
    raw: dict
    domain: GreenDomain
    K: CompactSet
    K_lambda: CompactSet
    f: ExternalField
    R: float
    N_list: list
    nodes: list | None
    points_per_N: int
    check_points: int
    galerkin_cells: int
    restarts: int
    mass_starts: int
    seed: int
    tol: float
    greedy_N_max: int
    greedy_slack: float | None
    scan_R: list | None
    pipeline: str
    out: Path
    plotdata: bool = True
    extra: dict = field(default_factory=dict)


def _inside(domain: GreenDomain, K: CompactSet) -> bool:
    """All of K except possibly piece endpoints lies in the open domain."""
    for p in K.pieces:
        s = np.linspace(0.0, p.length, 65)[1:-1]
        if not np.all(domain.contains(p.point(s))):
            return False
    return True


def parse_config(raw: dict, seed=None, out=None, pipeline=None) -> ExperimentConfig:
    if not isinstance(raw, dict):
        raise ConfigParse("<root>", "config must be a JSON object")
    try:
        domain = GreenDomain.from_name(raw.get("domain", "half_plane"))
    except ValueError as exc:
        raise ConfigParse("domain", f"unknown domain {raw.get('domain')!r}") from exc
    if "K" not in raw:
        raise ConfigParse("K", "missing")
    K = _compact(raw["K"], "K")
    if not _inside(domain, K):
        raise ConfigParse("K", f"K must lie in the closed {domain.name} with interior points inside")
    K_lam = _compact(raw["lambda_support"], "lambda_support") if "lambda_support" in raw else K
    if not np.all(K.contains(K_lam.uniform_grid(64))):
        raise ConfigParse("lambda_support", "must be a subset of K")
    if "field" not in raw:
        raise ConfigParse("field", "missing")
    f = _field(raw["field"], K)
    R = _num(raw.get("R", 1.0), "R", positive=True)
    N_list = raw.get("N", [8])
    if not isinstance(N_list, list) or not N_list:
        raise ConfigParse("N", "expected a nonempty list of integers")
    for n in N_list:
        if isinstance(n, bool) or not isinstance(n, int) or n < 2:
            raise ConfigParse("N", f"entries must be integers >= 2, got {n!r}")
    if any(b <= a for a, b in zip(N_list, N_list[1:])):
        raise ConfigParse("N", "must be strictly increasing")
    nodes = raw.get("nodes")
    if nodes is not None:
        try:
            nodes = [complex(x[0], x[1]) if isinstance(x, list) else complex(_num(x, "nodes")) for x in nodes]
        except (TypeError, IndexError) as exc:
            raise ConfigParse("nodes", "expected numbers or [re, im] pairs") from exc
        if not np.all(K.contains(np.array(nodes))):
            raise ConfigParse("nodes", "nodes must lie on K")
    grid = raw.get("grid", {})
    solver = raw.get("solver", {})
    greedy = raw.get("greedy", {})
    if not all(isinstance(x, dict) for x in (grid, solver, greedy)):
        raise ConfigParse("grid/solver/greedy", "must be objects")
    restarts = int(solver.get("restarts", 8))
    if restarts < 0:
        raise ConfigParse("solver.restarts", "must be nonnegative")
    if seed is None:
        if "seed" not in solver and restarts > 0:
            raise ConfigParse("solver.seed", "a seed is required when random restarts are enabled")
        seed = solver.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        raise ConfigParse("solver.seed", "must be a nonnegative integer")
    scan = raw.get("scan_R")
    if scan is not None:
        if not isinstance(scan, list):
            raise ConfigParse("scan_R", "expected a list of R values")
        scan = [_num(r, "scan_R", positive=True) for r in scan]
    pipeline = pipeline or raw.get("pipeline", "verify-all")
    if pipeline not in PIPELINES:
        raise ConfigParse("pipeline", f"unknown pipeline {pipeline!r}; choose from {PIPELINES}")
    output = raw.get("output", {})
    out = Path(out or output.get("dir", "out"))
    slack = greedy.get("slack")
    return ExperimentConfig(
        raw=raw, domain=domain, K=K, K_lambda=K_lam, f=f, R=R, N_list=list(N_list), nodes=nodes,
        points_per_N=int(grid.get("points_per_N", 8)), check_points=int(grid.get("check_points", 2001)),
        galerkin_cells=int(grid.get("galerkin_cells", 512)), restarts=restarts,
        mass_starts=int(solver.get("mass_starts", 8)), seed=int(seed),
        tol=_num(solver.get("tol", 1e-10), "solver.tol", positive=True),
        greedy_N_max=int(greedy.get("N_max", N_list[-1])),
        greedy_slack=None if slack is None else _num(slack, "greedy.slack", allow_inf=True),
        scan_R=scan, pipeline=pipeline, out=out, plotdata=bool(output.get("plotdata", True)))


# ---------------------------------------------------------------------------
# output


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return format(x, ".17g")
    return str(x)


def write_csv(path: Path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([fmt(v) for v in r])


def write_json(path: Path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def emit_plotdata(traces: dict, path: Path):
    """Long-format CSV: series, N_or_R, value."""
    rows = []
    for name in traces:
        for x, y in traces[name]:
            rows.append((name, x, y))
    write_csv(path, ["series", "N_or_R", "value"], rows)


# ---------------------------------------------------------------------------
# pipelines


class Runner:
    def __init__(self, cfg: ExperimentConfig):
        self.cfg = cfg
        self.reports: list = []
        self.plot: dict = {}
        self._cache: dict = {}
        self.stage = "setup"

    # shared ingredients -------------------------------------------------
    def interior(self, pts):
        pts = np.asarray(pts, dtype=complex)
        return pts[self.cfg.domain.contains(pts)]

    @property
    def grid(self):
        if "grid" not in self._cache:
            c = self.cfg
            n = max(c.points_per_N * c.N_list[-1], 4 * c.N_list[-1])
            parts = [c.K.uniform_grid(n)]
            for N in c.N_list:
                try:
                    parts.append(build_interval_partition(c.K_lambda, N).nodes)
                except GreenEqError:
                    pass
            if c.nodes:
                parts.append(np.array(c.nodes))
            self._cache["grid"] = self.interior(merge_points(*parts, K=c.K))
        return self._cache["grid"]

    @property
    def check_grid(self):
        if "check" not in self._cache:
            self._cache["check"] = self.interior(self.cfg.K.uniform_grid(self.cfg.check_points - 1))
        return self._cache["check"]

    def f_norm(self):
        v = self.cfg.f.values(self.check_grid)
        v = v[np.isfinite(v)]
        return float(np.max(np.abs(v))) if len(v) else 0.0

    def galerkin(self, constrained=False):
        key = "gal_lam" if constrained else "gal"
        if key not in self._cache:
            K = self.cfg.K_lambda if constrained else self.cfg.K
            self._cache[key] = galerkin_system(self.cfg.domain, K, self.cfg.f, self.cfg.galerkin_cells)
        return self._cache[key]

    def v_hat(self):
        if "vhat" not in self._cache:
            self._cache["vhat"] = solve_ball(self.galerkin(), self.cfg.R)
        return self._cache["vhat"]

    def v_hat_lambda(self):
        if "vhat_lam" not in self._cache:
            self._cache["vhat_lam"] = solve_upper(self.galerkin(True), self.cfg.R)
        return self._cache["vhat_lam"]

    def report(self, name, values, passed, tol, inputs=None):
        d = V.digest({"config": self.cfg.raw, "check": name, "inputs": inputs or {}, "seed": self.cfg.seed})
        r = V.CheckResult(check=name, inputs_digest=d, values=values, passed=bool(passed), tolerance=tol)
        self.reports.append(r)
        write_json(self.cfg.out / f"verify_{name}.json", r.to_json())
        return r

    # pipelines ----------------------------------------------------------
    def free(self):
        self.stage = "free"
        if "free" in self._cache:
            return self._cache["free"]
        c = self.cfg
        extra = {}
        # seed each N with the node solution so that e_{l_N} <= d_N holds by construction
        if "nodes" in self._cache:
            for N, (nodes, sol) in self._cache["nodes"].items():
                if len(nodes) in c.N_list:
                    extra.setdefault(len(nodes), []).append((nodes, sol.masses))
        rows, sols = energy_scaling_trace(c.domain, c.f, c.R, c.N_list, self.grid, restarts=c.restarts,
                                          seed=c.seed, tol=c.tol, extra_init=extra)
        write_csv(c.out / "trace_free.csv", ["N", "e_N", "e_N_over_N2", "restarts", "converged"],
                  [(r.N, r.e_N, r.e_N_over_N2, r.restarts, r.converged) for r in rows])
        self.plot["e_N_over_N2"] = [(r.N, r.e_N_over_N2) for r in rows]
        self._cache["free"] = (rows, sols)
        return rows, sols

    def nodes(self):
        self.stage = "nodes"
        if "nodes" in self._cache:
            return self._cache["nodes"]
        c = self.cfg
        out, rows, mrows = {}, [], []
        if c.nodes:
            plist = [(len(c.nodes), None, np.array(c.nodes))]
        else:
            plist = []
            for N in c.N_list:
                P = build_interval_partition(c.K_lambda, N)
                plist.append((N, P, P.nodes))
        for N, P, nodes in plist:
            l_N = len(nodes)
            prob = MassProblem.from_nodes(c.domain, nodes, c.f, c.R, l_N)
            sol = solve_masses(prob, starts=c.mass_starts, seed=c.seed + N)
            res, rmax = kkt_residual(prob, sol.masses)
            out[N] = (nodes, sol)
            rows.append((N, l_N, sol.objective, sol.objective / l_N ** 2, rmax, sol.converged,
                         float(np.sum(sol.masses)) / l_N))
            cvec = prob.gradient(sol.masses)
            for j in range(l_N):
                mrows.append((N, j, nodes[j].real, nodes[j].imag, sol.masses[j], cvec[j], res[j]))
        write_csv(c.out / "trace_nodes.csv",
                  ["N", "l_N", "d_N", "d_N_over_lN2", "kkt_residual", "converged", "mass"], rows)
        write_csv(c.out / "trace_nodes_masses.csv",
                  ["N", "j", "x_j_re", "x_j_im", "m_j", "c_j", "residual_j"], mrows)
        self.plot["d_N_over_lN2"] = [(r[0], r[3]) for r in rows]
        self._cache["nodes"] = out
        return out

    def greedy_candidates(self):
        c = self.cfg
        grid = self.grid
        if np.all(c.f.values(grid) >= 0):
            return grid
        eq = self.v_hat()
        if eq.mass <= 0:
            return grid
        scale = V.tolerance_scale(eq.C_f(), self.f_norm(), eq.value)
        try:
            return estimate_A(c.domain, c.f, eq, eq.C_f(), grid, slack=c.greedy_slack, scale=scale)
        except GreenEqError:
            return grid

    def greedy(self):
        self.stage = "greedy"
        if "greedy" in self._cache:
            return self._cache["greedy"]
        c = self.cfg
        A = self.greedy_candidates()
        rows, state = greedy_run(c.domain, c.f, c.R, A, c.greedy_N_max)
        write_csv(c.out / "trace_greedy.csv",
                  ["N", "a_N_re", "a_N_im", "m_N", "chi_star", "E_over_N2", "mean_mf", "pair_energy_over_N2"],
                  [(r.N, r.a_N.real, r.a_N.imag, r.m_N, r.chi_star, r.E_over_N2, r.mean_mf,
                    r.pair_energy_over_N2) for r in rows])
        self.plot["greedy_E_over_N2"] = [(r.N, r.E_over_N2) for r in rows]
        self._cache["greedy"] = (rows, len(A))
        return rows, len(A)

    def constrained(self):
        self.stage = "constrained"
        c = self.cfg
        eq = self.v_hat_lambda()
        rows = []
        last = None
        for N in c.N_list:
            P = build_interval_partition(c.K_lambda, N)
            prob = MassProblem.from_nodes(c.domain, P.nodes, c.f, c.R, P.l_N)
            sol = solve_masses(prob, starts=c.mass_starts, seed=c.seed + N)
            rows.append((N, P.l_N, sol.objective, sol.objective / P.l_N ** 2, float(np.sum(sol.masses)) / P.l_N))
            last = (P, sol)
        write_csv(c.out / "trace_constrained.csv", ["N", "l_N", "d_N", "d_N_over_lN2", "mass"], rows)
        self.plot["constrained_d_over_lN2"] = [(r[0], r[3]) for r in rows]
        P, sol = last
        mu = WeightedConfiguration(P.nodes, sol.masses, c.R, normalization=P.l_N)
        scale = V.tolerance_scale(self.f_norm(), eq.value)
        vals = {"v_hat_f_lambda": eq.value, "galerkin_mass": eq.mass, "N": P.N, "l_N": P.l_N,
                "discrete_mass": mu.total_mass}
        try:
            rep = V.constrained_ess_inf_check(c.domain, mu, c.f, scale=scale)
            vals.update(sup_on_support=rep.sup_on_support, essinf_on_rho=rep.essinf_on_rho, zero_measure=False)
            self.report("constrained_essinf", vals, rep.passed, rep.tolerance)
        except ZeroMeasure:
            # the inequality is vacuous for the zero measure
            vals.update(zero_measure=True)
            self.report("constrained_essinf", vals, True, 1e-2 * scale)
        return rows, eq

    def scan(self):
        self.stage = "scan-R"
        c = self.cfg
        grid = c.scan_R or [c.R * t for t in (0.25, 0.5, 1.0, 1.5, 2.0)]
        system = self.galerkin()
        beta, _ = field_min(c.f, self.check_grid)
        kappa = V.kappa_min(c.domain, self.check_grid)
        thr = -2 * beta / kappa if beta < 0 and kappa > 0 else None
        rep = V.continuity_scan_R(lambda R: solve_ball(system, R), grid, tol=1e-6 * V.tolerance_scale(self.f_norm()),
                                  saturation_threshold=thr)
        write_csv(c.out / "trace_scanR.csv", ["R", "v_hat", "mass"], rep.rows)
        self.plot["v_hat_R"] = [(r[0], r[1]) for r in rep.rows]
        self.plot["mass_R"] = [(r[0], r[2]) for r in rep.rows]
        self.report("scan_R", {"rows": rep.rows, "L_est": rep.L_est, "monotone": rep.monotone,
                               "saturation_threshold": thr, "saturated_mass_spread": rep.saturated_mass_spread},
                    rep.passed(), 1e-3)
        return rep

    def verify_all(self):
        self.stage = "verify-all"
        c = self.cfg
        self.nodes()
        frows, sols = self.free()
        grows, nA = self.greedy()
        eq = self.v_hat()
        beta, _ = field_min(c.f, self.check_grid)
        f_norm = self.f_norm()
        scale = V.tolerance_scale(eq.C_f(), f_norm, eq.value)

        # bounds on v_f
        touches = not np.all(c.domain.contains(c.K.uniform_grid(64)))
        if touches:
            self.report("bounds", {"skipped": "K touches the domain boundary, kappa = 0"}, True, 0.0)
        else:
            kappa = V.kappa_min(c.domain, self.check_grid)
            b = V.energy_bounds(beta, kappa, c.R, eq.value)
            tol = 1e-6 * scale
            ok = b.lower_bound - tol <= eq.value <= tol and eq.mass <= b.R_star + 1e-6 if not b.zero_regime \
                else abs(eq.value) <= tol
            self.report("bounds", V.report_json(b), ok, tol)

        # Frostman at the largest N
        Nmax = c.N_list[-1]
        mu = sols[Nmax].configuration
        Cf = V.estimate_Cf(c.domain, mu, c.f, c.R)
        fr = V.frostman_check(c.domain, mu, c.f, self.check_grid, Cf, tolerance=1e-2 * scale)
        self.report("frostman", V.report_json(fr), fr.passed, fr.tolerance)

        # inequality chains
        e_trace = {r.N: r.e_N for r in frows}
        d_trace = {N: (sol.masses.size, sol.objective) for N, (_, sol) in self.nodes().items()}
        g_trace = {r.N: r.E_over_N2 * r.N ** 2 for r in grows if r.N in e_trace}
        vest = {"v_f": eq.value, "v_f_lambda": self.v_hat_lambda().value}
        entries = V.inequality_suite(e_trace, d_trace, g_trace, vest, scale)
        self.report("inequalities", {"entries": [V.report_json(e) for e in entries]},
                    all(e.passed for e in entries), 1e-6 * scale)

        # monotonicity in N for nonpositive fields
        if np.all(c.f.values(self.grid) <= 0):
            es = [r.e_N for r in frows]
            ok = all(b <= a + 1e-6 for a, b in zip(es, es[1:]))
            self.report("monotone_N", {"e_N": dict(zip([r.N for r in frows], es))}, ok, 1e-6)

        # nonnegative field: everything vanishes
        if beta >= 0:
            nz = [int(np.count_nonzero(s.configuration.masses)) for s in sols.values()]
            vals = {"e_N": [r.e_N for r in frows], "max_nonzero_masses": max(nz), "v_hat": eq.value,
                    "galerkin_mass": eq.mass}
            ok = all(r.e_N == 0 for r in frows) and max(nz) <= 1 and eq.value == 0 and eq.mass == 0
            self.report("trivial_regime", vals, ok, 0.0)

        # greedy diagnostics
        last = grows[-1]
        U16 = abs(grows[15].U_over_N) if len(grows) >= 16 else math.nan
        self.report("greedy", {"candidates": nA, "E_over_N2": last.E_over_N2,
                               "e_over_N2": e_trace.get(last.N, math.nan) / last.N ** 2,
                               "U_over_N_last": abs(last.U_over_N), "U_over_N_16": U16,
                               "masses_bang_bang": all(r.m_N in (0.0, c.R) for r in grows),
                               "saturated_equilibrium": bool(eq.mass >= c.R - 1e-9)},
                    all(r.m_N in (0.0, c.R) for r in grows), 0.0)

        # reference measure regularity
        eps = [1e-1, 1e-2, 1e-3, 1e-4]
        lr = V.lambda_regularity(c.K_lambda, eps)
        vals = [v for _, v in lr]
        self.report("lambda_regularity", {"eps": eps, "values": vals},
                    all(b < a for a, b in zip(vals, vals[1:])), 0.0)

        self.constrained()
        if c.scan_R:
            self.scan()

    def run(self) -> int:
        c = self.cfg
        c.out.mkdir(parents=True, exist_ok=True)
        p = c.pipeline
        if p == "free":
            self.free()
        elif p == "nodes":
            self.nodes()
        elif p == "greedy":
            self.greedy()
        elif p == "constrained":
            self.constrained()
        elif p == "scan-R":
            self.scan()
        else:
            self.verify_all()
        if c.plotdata:
            emit_plotdata(self.plot, c.out / "plotdata.csv")
        return 2 if any(not r.passed for r in self.reports) else 0


def run(config_path, seed=None, out=None, pipeline=None) -> int:
    try:
        with open(config_path) as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigParse("<file>", f"invalid JSON: {exc}") from exc
    cfg = parse_config(raw, seed=seed, out=out, pipeline=pipeline)
    runner = Runner(cfg)
    try:
        return runner.run()
    except GreenEqError as exc:
        if isinstance(exc, ConfigParse):
            raise
        print(f"pipeline error in {runner.stage}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="greeneq", description="Weighted Green energy experiments")
    sub = ap.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run a pipeline from a JSON config")
    r.add_argument("config")
    r.add_argument("--seed", type=int, default=None)
    r.add_argument("--out", default=None)
    r.add_argument("--pipeline", choices=PIPELINES, default=None)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return run(args.config, seed=args.seed, out=args.out, pipeline=args.pipeline)
    except ConfigParse as exc:
        print(f"config error [{exc.key}]: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 1
    except GreenEqError as exc:
        print(f"pipeline error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""Command line front end: ``lanemden check|solve|verify|sweep --config FILE``.

Exit codes: 0 when every flag in the report holds, 2 when some flag fails
(including structured solver failures), 1 for configuration or I/O errors.
"""
from __future__ import annotations

import argparse
import copy
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .config import SCHEMA_VERSION, ConfigError, ScenarioConfig, config_dict, read_config_data, validate_config
from .criteria import CriteriaReport, check_criteria, default_limc_radii
from .potentials import riesz_comparable
from .report import csv_text, dumps, plain, trace_csv, write_text
from .solver import SolveConfig, SolverError, monotone_solve, monotone_solve_inhom
from .verify import (
    BoundReport,
    domination_check,
    energy_test,
    growth_test,
    kappa_lowerbound_test,
    refined_solution,
    verify_profile,
    verify_sandwich,
)

COMMANDS = ("check", "solve", "verify", "sweep")
EXIT_OK, EXIT_CONFIG, EXIT_FLAG = 0, 1, 2


@dataclass
class RunReport:
    """Deterministic ``payload`` plus wall-clock ``timings`` kept apart from it."""

    payload: dict
    rows: list[dict]
    timings: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return bool(self.payload["ok"])


# --- sections -----------------------------------------------------------------

def _criteria_section(rep: CriteriaReport) -> dict:
    rc = rep.radialcond
    return {
        "finpot": {"holds": rep.finpot.holds, "tail_moment": rep.finpot.tail_moment,
                   "unit_ball_mass": rep.finpot.unit_ball_mass},
        "radialcond": {"local_r1": rc.local_r1, "local_r2": rc.local_r2, "tail": rc.tail,
                       "local_r1_ok": rc.local_r1_ok, "local_r2_ok": rc.local_r2_ok,
                       "tail_ok": rc.tail_ok, "holds": rc.holds},
        "limc": [
            {"i": s.i, "classification": s.classification, "slope": s.slope, "limsup": s.limsup,
             "radii": list(s.radii), "ratios": list(s.ratios), "notes": list(s.notes)}
            for s in rep.limc
        ],
        "limc_holds": rep.limc_holds,
        "con2": [_sup(b) for b in rep.con2],
        "c114": [_sup(b) for b in rep.c114],
    }


def _sup(b) -> dict:
    return {"i": b.i, "constant": b.constant, "refined": b.refined, "holds": b.holds, "notes": list(b.notes)}


def _solve_section(res) -> dict:
    return {
        "converged": res.converged, "iterations": res.iterations, "trivial": res.trivial,
        "inhomogeneous": res.inhomogeneous,
        "lambda_sub": res.lambda_sub, "lambda_super": res.lambda_super,
        "residual": res.residual, "monotone_violation": res.monotone_violation,
        "notes": list(res.notes), "radii": res.grid.radii, "u": res.u.values, "v": res.v.values,
        "trace_u": list(res.trace_u), "trace_v": list(res.trace_v),
    }


def _bounds(b: BoundReport) -> dict:
    out = {"stable": b.stable, "trivial": b.trivial, "finite": b.finite, "notes": list(b.notes)}
    for name in ("c_low", "c_up", "profile_low", "profile_up"):
        if getattr(b, name) is not None:
            out[name] = list(getattr(b, name))
    if b.refined is not None:
        out["refined"] = [list(p) for p in b.refined]
    return out


def _sup_test(t) -> dict:
    return {"sup": t.sup, "refined_sup": t.refined_sup, "bounded": t.bounded, "witness": list(t.witness)}


# --- orchestration ----------------------------------------------------------------

def _run_point(cfg: ScenarioConfig, command: str):
    exps = cfg.exps()
    sigma = cfg.measure("sigma")
    mu1, mu2 = cfg.measure("mu1"), cfg.measure("mu2")
    grid = cfg.radial_grid()
    timings = {}
    flags = {}
    payload = {
        "exponents": {"n": exps.n, "alpha": exps.alpha, "q1": exps.q1, "q2": exps.q2, "d": exps.d,
                      "gamma1": exps.gamma1, "gamma2": exps.gamma2, "r1": exps.r1, "r2": exps.r2},
    }
    t0 = time.perf_counter()
    crit = check_criteria(sigma, exps, grid, default_limc_radii(cfg.limc_levels))
    timings["criteria_s"] = time.perf_counter() - t0
    payload["criteria"] = _criteria_section(crit)
    flags.update(
        finpot=crit.finpot.holds,
        radialcond=crit.radialcond.holds,
        limc=crit.limc_holds,
        con2=all(b.holds for b in crit.con2),
        c114=all(b.holds for b in crit.c114),
    )
    result = None
    scfg = SolveConfig(grid, cfg.solve.tol, cfg.solve.max_iter, kernel=cfg.solve.kernel)
    if command in ("solve", "verify"):
        t0 = time.perf_counter()
        try:
            if cfg.inhomogeneous:
                result = monotone_solve_inhom(sigma, mu1, mu2, exps, scfg)
            else:
                result = monotone_solve(sigma, exps, scfg)
            payload["solve"] = _solve_section(result)
            flags["solve"] = result.converged
        except SolverError as exc:
            payload["solve"] = {"error": str(exc), "error_type": type(exc).__name__}
            flags["solve"] = False
        timings["solve_s"] = time.perf_counter() - t0
    if command == "verify":
        t0 = time.perf_counter()
        payload["verify"], vflags = _verify(cfg, result, sigma, mu1, mu2, exps, grid, scfg)
        flags.update(vflags)
        timings["verify_s"] = time.perf_counter() - t0
    payload["flags"] = flags
    payload["ok"] = all(flags.values())
    return payload, timings


def _verify(cfg, result, sigma, mu1, mu2, exps, grid, scfg):
    out, flags = {}, {}
    vs = cfg.verify
    if result is not None and result.converged:
        try:
            fine = refined_solution(result, sigma, exps, grid, scfg, mu1, mu2)
            sand = verify_sandwich(result, sigma, exps, grid, scfg, mu1, mu2, refined=fine)
            prof = verify_profile(result, sigma, exps, grid, scfg, mu1, mu2, refined=fine)
            out["sandwich"], out["profile"] = _bounds(sand), _bounds(prof)
            flags["sandwich"] = sand.finite and sand.stable
            flags["profile"] = prof.finite and prof.stable
        except SolverError as exc:
            out["bounds_error"] = str(exc)
            flags["sandwich"] = flags["profile"] = False
    else:
        out["bounds_error"] = "no converged solution to verify"
        flags["sandwich"] = flags["profile"] = False
    if _comparable_finite(sigma, exps, grid):
        k = kappa_lowerbound_test(sigma, exps, vs.kappa_r, grid)
        out["kappa"] = {"kappa": k.kappa, "refined": k.refined, "stable": k.stable, "skipped": k.skipped,
                        "witness": k.witness}
        flags["kappa"] = k.skipped or (k.kappa is not None and k.kappa > 0)
    else:
        out["kappa"] = {"skipped": True, "reason": "A sigma not finite on the grid"}
        flags["kappa"] = False
    energy = energy_test(sigma, exps, vs.energy_s, vs.radii)
    growth = growth_test(sigma, exps, vs.centers, vs.radii)
    out["capacity_screen"] = {
        "energy": _sup_test(energy),
        "growth": _sup_test(growth),
        "caveat": "ball growth and restricted energy are necessary-side surrogates of the capacity condition",
    }
    if cfg.inhomogeneous:
        # the capacity-type hypothesis only enters the forced problem
        flags["capacity_screen"] = energy.bounded and growth.bounded
        dom = {}
        for name, mu in (("mu1", mu1), ("mu2", mu2)):
            ok, c, measured, refined = domination_check(mu, sigma, exps, grid)
            dom[name] = {"holds": ok, "C": c, "measured": measured, "refined": refined}
            flags[f"domination_{name}"] = ok
        out["domination"] = dom
    return out, flags


def _comparable_finite(sigma, exps, grid) -> bool:
    return bool(np.all(np.isfinite(riesz_comparable(sigma, exps, grid.radii))))


def _row(payload: dict, index: int, name: str, value=None) -> dict:
    e, c = payload["exponents"], payload["criteria"]
    row = {
        "index": index, "name": name, "sweep_value": value,
        "n": e["n"], "alpha": e["alpha"], "q1": e["q1"], "q2": e["q2"],
        "gamma1": e["gamma1"], "gamma2": e["gamma2"],
        "finpot": c["finpot"]["holds"], "tail_moment": c["finpot"]["tail_moment"],
        "radialcond": c["radialcond"]["holds"],
        "local_r1": c["radialcond"]["local_r1"], "local_r2": c["radialcond"]["local_r2"],
        "limc1": c["limc"][0]["classification"], "limc2": c["limc"][1]["classification"],
        "limsup1": c["limc"][0]["limsup"], "limsup2": c["limc"][1]["limsup"],
        "con2_ok": payload["flags"]["con2"], "con2_1": c["con2"][0]["constant"], "con2_2": c["con2"][1]["constant"],
        "c114_ok": payload["flags"]["c114"], "c114_1": c["c114"][0]["constant"], "c114_2": c["c114"][1]["constant"],
        "ok": payload["ok"],
    }
    s = payload.get("solve")
    if s and "error" not in s:
        row.update(converged=s["converged"], iterations=s["iterations"], lambda_sub=s["lambda_sub"],
                   lambda_super=s["lambda_super"], residual=s["residual"])
    elif s:
        row["converged"] = False
    sand = payload.get("verify", {}).get("sandwich")
    if sand:
        row.update(c_low1=sand["c_low"][0], c_low2=sand["c_low"][1], c_up1=sand["c_up"][0],
                   c_up2=sand["c_up"][1], bounds_stable=sand["stable"])
    return row


def set_path(data: dict, path: str, value) -> dict:
    """Copy of ``data`` with the dotted ``path`` (list indices allowed) set to ``value``."""
    out = copy.deepcopy(data)
    keys = path.split(".")
    node = out
    try:
        for k in keys[:-1]:
            node = node[int(k)] if isinstance(node, list) else node[k]
        last = keys[-1]
        if isinstance(node, list):
            node[int(last)] = value
        elif isinstance(node, dict):
            node[last] = value
        else:
            raise TypeError(last)
    except (KeyError, IndexError, ValueError, TypeError):
        raise ConfigError([(path, "sweep path does not name a config field")]) from None
    return out


def _sweep_point(args):
    data, command = args
    cfg = validate_config(data)
    return _run_point(cfg, command)


def run_scenario(cfg: ScenarioConfig, command: str, jobs: int = 1) -> RunReport:
    if command not in COMMANDS:
        raise ValueError(f"unknown command {command!r}")
    start = time.perf_counter()
    echo = config_dict(cfg)
    if command != "sweep":
        payload, timings = _run_point(cfg, command)
        payload = {"schema_version": SCHEMA_VERSION, "command": command, "config": echo, **payload}
        timings["total_s"] = time.perf_counter() - start
        payload = plain(payload)
        return RunReport(payload, [_row(payload, 0, cfg.name)], timings)
    if cfg.sweep is None:
        raise ConfigError([("sweep", "the sweep command needs a sweep section")])
    values = cfg.sweep.points()
    base = {k: v for k, v in echo.items() if k != "sweep"}
    points = [validate_config(set_path(base, cfg.sweep.path, v)) for v in values]
    tasks = [(config_dict(p), cfg.sweep.command) for p in points]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_sweep_point, tasks))
    else:
        outcomes = [_sweep_point(t) for t in tasks]
    entries, rows, point_times = [], [], []
    for k, (value, (payload, timings)) in enumerate(zip(values, outcomes)):
        payload = plain(payload)
        entries.append({"index": k, "value": value, **payload})
        rows.append(_row(payload, k, cfg.name, value))
        point_times.append(timings)
    payload = {
        "schema_version": SCHEMA_VERSION, "command": "sweep", "config": echo,
        "sweep": {"path": cfg.sweep.path, "command": cfg.sweep.command, "values": values},
        "points": entries,
        "ok": all(e["ok"] for e in entries),
    }
    timings = {"total_s": time.perf_counter() - start, "points": point_times}
    return RunReport(plain(payload), rows, timings)


def render(report: RunReport, fmt: str) -> str:
    if fmt == "json":
        return dumps(report.payload) + "\n"
    if fmt == "csv":
        return csv_text(report.rows)
    raise ValueError(f"unknown format {fmt!r}")


def emit_report(report: RunReport, fmt: str, path=None) -> str:
    """Write the report (and a ``.timings.json`` sidecar) to ``path``; return the text."""
    text = render(report, fmt)
    if path is None:
        sys.stdout.write(text)
    else:
        write_text(path, text)
        write_text(f"{path}.timings.json", dumps(plain(report.timings)) + "\n")
    return text


def load_config(path, overrides: dict | None = None) -> ScenarioConfig:
    """Read a config file and apply flag overrides (flag > config > default)."""
    data = read_config_data(path)
    for dotted, value in (overrides or {}).items():
        if value is None:
            continue
        section, key = dotted.split(".")
        sub = data.get(section, {})
        if not isinstance(sub, dict):
            raise ConfigError([(section, "must be an object")])
        data[section] = {**sub, key: value}
    return validate_config(data)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lanemden", description="Criteria, solver and bound checks for radial measures.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", required=True, help="scenario JSON file")
    p.add_argument("--output", help="report path (stdout if omitted)")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--grid-points", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--max-iter", type=int)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--trace", help="write the iteration trace of a solve as CSV")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {"grid.points": args.grid_points, "solve.tol": args.tol, "solve.max_iter": args.max_iter}
    try:
        cfg = load_config(args.config, overrides)
        report = run_scenario(cfg, args.command, jobs=max(1, args.jobs))
    except ConfigError as exc:
        for loc, msg in exc.errors:
            print(f"config error: {loc}: {msg}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        emit_report(report, args.format, args.output)
        solve = report.payload.get("solve")
        if args.trace and solve and "trace_u" in solve:
            write_text(args.trace, trace_csv(solve["trace_u"], solve["trace_v"]))
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK if report.ok else EXIT_FLAG


if __name__ == "__main__":
    sys.exit(main())

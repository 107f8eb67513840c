"""Command line entry point.

    eqarea run SCENARIO.yaml [...] [--out DIR] [--mode flow|appendix]
                                   [--reinit never|after-collision|every-output] [--jobs N]
    eqarea convergence SCENARIO.yaml --ladder 1 0.1 0.01 [--kind dt|n] [--t-end T]
    eqarea compare SCENARIO.yaml --oracle triangle|riemann|front-tracking|godunov

Exit codes: 0 success, 2 configuration error, 3 solver error,
4 a tolerance was breached.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path
from typing import Optional

import numpy as np
import yaml

from .errors import ConfigError, EqAreaError, NoOracle, SolverError
from .interpolate import adaptive_quadrature, parametric_hermite
from .oracle import (front_tracking_exact, godunov_reference, piecewise_constant_data, riemann_exact,
                     triangle_exact)
from .scenario import (ORACLES, Scenario, conserved_mass, load_scenario, mass_scale, window_for)
from .shock import TrackResult, _reinit, track_curve

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_BREACH = 0, 2, 3, 4


class ThresholdBreach(EqAreaError):
    pass


def _f(v) -> str:
    return repr(float(v))


def _write_csv(path: Path, header: list, rows: list):
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _track(scenario: Scenario, times=None) -> TrackResult:
    o = scenario.options
    times = scenario.output_times if times is None else times
    return track_curve(scenario.build_curve(), times, mode=o.mode, reinit=o.reinit,
                       order=o.appendix_order, k_per_jump=o.k_per_jump)


# {{{ run

def _max_area_defect(curve, t: float) -> float:
    """Largest chord-rule Hermite area defect over the node intervals of the flowed curve."""
    worst = 0.0
    s = curve.node_s
    for i in range(s.size - 1):
        a, b = float(s[i]), float(s[i + 1])
        pa, pb = curve.point(a, t), curve.point(b, t)
        va = curve.flow_velocity(a, t, side="right", strict=False)
        vb = curve.flow_velocity(b, t, side="left", strict=False)
        if va == (0.0, 0.0) or vb == (0.0, 0.0) or pa == pb:
            continue
        seg = parametric_hermite(pa, pb, va, vb, curve.segment_area(i, t))
        worst = max(worst, seg.area_defect)
    return worst


def conservation_report(scenario: Scenario, res: TrackResult) -> dict:
    """Window mass of curve, projected view and reinitialized curve against the exact budget."""
    t_end = float(res.times[-1])
    window = window_for(scenario, t_end)
    scale = mass_scale(scenario, t_end, window)
    rows = []
    worst = 0.0
    for t, view, cur in zip(res.times, res.views, res.curves):
        exact = conserved_mass(scenario, t, window)
        m_curve = cur.window_area(*window, t)
        m_view = view.window_area(*window)
        m_reinit = _reinit(cur, t, view)[0].window_area(*window, t)
        drift = max(abs(m_curve - exact), abs(m_view - exact), abs(m_reinit - exact))
        worst = max(worst, drift)
        rows.append({"t": t, "mass_exact": exact, "mass_curve": m_curve, "mass_projected": m_view,
                     "mass_reinitialized": m_reinit, "drift": drift})
    return {"window": list(window), "scale": scale, "max_drift": worst, "per_time": rows}


def run_scenario(scenario: Scenario, out: Path) -> dict:
    t0 = time.perf_counter()
    res = _track(scenario)
    wall = time.perf_counter() - t0
    out.mkdir(parents=True, exist_ok=True)
    sample_rows, shock_rows = [], []
    defects = []
    for t, view, cur, recs in zip(res.times, res.views, res.curves, res.records):
        cuts = sorted(view.shocks + view.dropped, key=lambda r: r.s0)
        for s in cur.node_s:
            x, u = cur.point(float(s), t)
            fold = any(r.s0 < s < r.s1 for r in cuts)
            sample_rows.append([_f(t), _f(s), _f(x), _f(u), "fold" if fold else "weak"])
        for r in recs:
            shock_rows.append([_f(t), r.id, _f(r.X), _f(r.uL), _f(r.uR), _f(r.speed), r.provenance])
        defects.append(_max_area_defect(cur, t))
    _write_csv(out / "curve_samples.csv", ["t", "s", "x", "u", "branch"], sample_rows)
    _write_csv(out / "shocks.csv", ["t", "id", "X", "uL", "uR", "speed", "provenance"], shock_rows)
    cons = conservation_report(scenario, res)
    residuals = [abs(r.residual) / r.scale for recs in res.records for r in recs]
    tol = scenario.options.tolerances["conservation"]
    summary = {
        "scenario": scenario.name,
        "mode": scenario.options.mode,
        "reinit": scenario.options.reinit,
        "output_times": [float(t) for t in res.times],
        "total_area": [res.curves[0].total_area(t) for t in res.times],
        "conservation": cons,
        "conservation_ok": cons["max_drift"] <= tol * cons["scale"],
        "max_area_defect_per_time": defects,
        "max_relative_residual": max(residuals, default=0.0),
        "projection_methods": [d["method"] for d in res.diagnostics],
        "collisions": [{"t": c.t, "X": c.X, "parents": list(c.parents), "child": c.child} for c in res.collisions],
        "breaking_time": res.curves[0].breaking_time(),
        "wall_time_s": wall,
    }
    (out / "summary.json").write_text(json.dumps(summary, indent=2, default=float) + "\n")
    return summary


def _run_one(path: str, out: str, mode: Optional[str], reinit: Optional[str], many: bool):
    try:
        sc = load_scenario(path).with_options(mode=mode, reinit=reinit)
        dest = Path(out) / sc.name if many else Path(out)
        summary = run_scenario(sc, dest)
    except ConfigError as exc:
        return EXIT_CONFIG, f"{path}: config error: {exc}"
    except SolverError as exc:
        return EXIT_SOLVER, f"{path}: solver error: {exc}"
    msg = (f"{sc.name}: {len(summary['output_times'])} output times, "
           f"max conservation drift {summary['conservation']['max_drift']:.3e}, wrote {dest}")
    if not summary["conservation_ok"]:
        return EXIT_BREACH, msg + " (conservation tolerance breached)"
    return EXIT_OK, msg


def _expand_batch(paths: list) -> list:
    out = []
    for p in paths:
        try:
            data = yaml.safe_load(Path(p).read_text())
        except (OSError, yaml.YAMLError):
            out.append(p)
            continue
        if isinstance(data, dict) and "scenarios" in data and "profile" not in data:
            base = Path(p).parent
            out.extend(str(base / q) for q in data["scenarios"])
        else:
            out.append(p)
    return out


def cmd_run(args) -> int:
    paths = _expand_batch(args.scenario)
    many = len(paths) > 1
    jobs = [(p, args.out, args.mode, args.reinit, many) for p in paths]
    if args.jobs > 1 and many:
        with ProcessPoolExecutor(max_workers=args.jobs) as ex:
            results = list(ex.map(_run_one, *zip(*jobs)))
    else:
        results = [_run_one(*j) for j in jobs]
    for _, msg in results:
        print(msg)
    return max(code for code, _ in results)

# }}}


# {{{ oracles

def _oracle_name(scenario: Scenario, requested: Optional[str]) -> str:
    name = requested or scenario.oracle
    if name is None:
        raise NoOracle(f"scenario {scenario.name!r} names no oracle; pass --oracle")
    if name not in ORACLES:
        raise NoOracle(f"unknown oracle {name!r}")
    return name


def _check_triangle(scenario: Scenario):
    xs = np.linspace(-0.5, 1.5, 41)
    ref = np.where((xs >= 0) & (xs < 1), xs, 0.0)
    if scenario.flux.name != "burgers" or not np.allclose(scenario.profile(xs), ref, atol=1e-14):
        raise NoOracle("triangle oracle needs the unit ramp with a drop at x = 1 under Burgers flux")


def _riemann_states(scenario: Scenario):
    p = scenario.profile
    if len(p.jumps) != 1 or any(q.constant is None for q in p.pieces):
        raise NoOracle("riemann oracle needs exactly one jump between constant states")
    return p.jumps[0].x, p.u_left_tail, p.u_right_tail


def exact_shocks(scenario: Scenario, oracle: str, t: float) -> list:
    """Reference ``(X, uL, uR, speed)`` list at time ``t``."""
    F = scenario.flux.F
    if oracle == "triangle":
        _check_triangle(scenario)
        X = triangle_exact(t)[0]
        return [(X, X / (1 + t), 0.0, 0.5 / math.sqrt(1 + t))]
    if oracle == "riemann":
        x0, a, b = _riemann_states(scenario)
        if a <= b:
            return []
        sp = (F(a) - F(b)) / (a - b)
        return [(x0 + sp * t, a, b, sp)]
    if oracle == "front-tracking":
        try:
            jumps, states = piecewise_constant_data(scenario.profile)
            ft = front_tracking_exact([Fraction(x) for x in jumps], [Fraction(u) for u in states],
                                      F, Fraction(t))
        except EqAreaError as exc:
            raise NoOracle(str(exc)) from None
        return [(float(f.at(ft.t)), float(f.uL), float(f.uR), float(f.speed)) for f in ft.fronts]
    raise NoOracle(f"{oracle} has no closed-form shock set")


def exact_profile(scenario: Scenario, oracle: str, t: float):
    if oracle == "triangle":
        X, left, right = triangle_exact(t)
        return lambda x: np.where((x >= 0) & (x < X), left(x), right(x)), [0.0, X]
    if oracle == "riemann":
        x0, a, b = _riemann_states(scenario)
        return lambda x: riemann_exact(scenario.flux, a, b, t, np.asarray(x) - x0), \
            [x0 + scenario.flux.dF(a) * t, x0 + scenario.flux.dF(b) * t] + [s[0] for s in exact_shocks(scenario, oracle, t)]
    if oracle == "front-tracking":
        jumps, states = piecewise_constant_data(scenario.profile)
        ft = front_tracking_exact([Fraction(x) for x in jumps], [Fraction(u) for u in states],
                                  scenario.flux.F, Fraction(t))
        pos = [float(f.at(ft.t)) for f in ft.fronts]
        vals = [float(ft.fronts[0].uL)] + [float(f.uR) for f in ft.fronts] if ft.fronts else [float(states[0])]
        return lambda x: np.asarray(vals)[np.searchsorted(pos, x, side="right")], pos
    raise NoOracle(f"{oracle} has no closed-form profile")


def l1_distance(view, exact, breaks: list, window: tuple) -> float:
    pts = sorted({window[0], window[1], *[b for b in breaks if window[0] < b < window[1]],
                  *[s.X for s in view.shocks if window[0] < s.X < window[1]]})
    f = lambda x: np.abs(view.evaluate(x) - exact(x))
    return math.fsum(adaptive_quadrature(f, a, b, tol=1e-14, limit=200) for a, b in zip(pts[:-1], pts[1:]) if b > a)


def compare(scenario: Scenario, oracle: Optional[str] = None, nx: int = 2 ** 14) -> dict:
    oracle = _oracle_name(scenario, oracle)
    res = _track(scenario)
    report = {"scenario": scenario.name, "oracle": oracle, "per_time": []}
    t_end = float(res.times[-1])
    window = window_for(scenario, t_end)
    if oracle == "godunov":
        for t, recs in zip(res.times, res.records):
            if t == 0 or not recs:
                continue
            g = godunov_reference(scenario, nx, 0.9, t, domain=window)
            X = max(recs, key=lambda r: r.uL - r.uR).X
            Xg = g.shock_position()
            report["per_time"].append({"t": t, "X": X, "X_godunov": Xg, "dX_cells": abs(X - Xg) / g.dx,
                                       "godunov_mass_drift": g.mass_drift})
        report["max_dX_cells"] = max((r["dX_cells"] for r in report["per_time"]), default=0.0)
        report["ok"] = report["max_dX_cells"] <= 2.0
        return report
    tol = scenario.options.tolerances
    cons = conservation_report(scenario, res)
    for t, view, recs in zip(res.times, res.views, res.records):
        ref = exact_shocks(scenario, oracle, t)
        row = {"t": t, "n_shocks": len(recs), "n_exact": len(ref)}
        if len(ref) == len(recs):
            num = sorted(recs, key=lambda r: r.X)
            row["dX"] = max((abs(r.X - e[0]) for r, e in zip(num, ref)), default=0.0)
            row["dspeed"] = max((abs(r.speed - e[3]) for r, e in zip(num, ref)), default=0.0)
        else:
            row["dX"] = row["dspeed"] = math.inf
        if t > 0:
            exact, breaks = exact_profile(scenario, oracle, t)
            row["l1"] = l1_distance(view, exact, breaks, window)
        report["per_time"].append(row)
    if oracle == "front-tracking":
        jumps, states = piecewise_constant_data(scenario.profile)
        ft = front_tracking_exact([Fraction(x) for x in jumps], [Fraction(u) for u in states],
                                  scenario.flux.F, Fraction(t_end))
        pairs = list(zip(res.collisions, ft.events))
        report["collisions"] = [{"t": c.t, "t_exact": float(e.t), "dt_star": abs(c.t - float(e.t)),
                                 "dx_star": abs(c.X - float(e.x))} for c, e in pairs]
        report["collision_count_ok"] = len(res.collisions) == len(ft.events)
    report["max_dX"] = max(r["dX"] for r in report["per_time"])
    report["max_l1"] = max((r.get("l1", 0.0) for r in report["per_time"]), default=0.0)
    report["conservation_drift"] = cons["max_drift"]
    ok = report["max_dX"] <= tol["shock"] and report["max_l1"] <= tol["profile_l1"] \
        and cons["max_drift"] <= tol["conservation"] * cons["scale"]
    if oracle == "front-tracking":
        ok = ok and report["collision_count_ok"] and all(c["dt_star"] <= tol["shock"] for c in report["collisions"])
    report["ok"] = bool(ok)
    return report


def convergence(scenario: Scenario, ladder: list, kind: str = "dt", t_end: Optional[float] = None,
                godunov_fallback: bool = False, nx: int = 2 ** 14) -> dict:
    """Shock position error at ``t_end`` for each rung of the ladder."""
    t_end = float(scenario.output_times[-1] if t_end is None else t_end)
    oracle = scenario.oracle
    if oracle is None or oracle == "godunov":
        if not godunov_fallback and oracle != "godunov":
            raise NoOracle(f"scenario {scenario.name!r} has no exact solution; pass --godunov-fallback")
        g = godunov_reference(scenario, nx, 0.9, t_end, domain=window_for(scenario, t_end))
        ref = [g.shock_position()]
        unit = g.dx
    else:
        ref = [e[0] for e in exact_shocks(scenario, oracle, t_end)]
        unit = None
    rows = []
    for p in ladder:
        if kind == "dt":
            n = max(1, int(round(t_end / p)))
            times = np.linspace(0.0, t_end, n + 1) if abs(n * p - t_end) <= 1e-9 * t_end \
                else np.append(np.arange(0.0, t_end, p), t_end)
            res = _track(scenario, times)
        elif kind == "n":
            sc = scenario.with_options(n_per_piece=int(p))
            res = _track(sc, [t_end])
        else:
            raise ConfigError(f"unknown ladder kind {kind!r}")
        recs = sorted(res.records[-1], key=lambda r: r.X)
        if unit is not None:
            recs = [max(recs, key=lambda r: r.uL - r.uR)] if recs else []
        if len(recs) != len(ref):
            err = math.inf
        else:
            err = max((abs(r.X - x) for r, x in zip(recs, ref)), default=0.0)
        rows.append({"parameter": float(p), "error": err})
    return {"scenario": scenario.name, "kind": kind, "t_end": t_end, "reference": ref,
            "reference_cell": unit, "rows": rows}

# }}}


def cmd_convergence(args) -> int:
    sc = load_scenario(args.scenario).with_options(mode=args.mode, reinit=args.reinit)
    rep = convergence(sc, args.ladder, args.kind, args.t_end, args.godunov_fallback, args.nx)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_csv(out / "convergence.csv", [args.kind, "error"], [[_f(r["parameter"]), _f(r["error"])] for r in rep["rows"]])
    print(f"{'parameter':>12}  error")
    for r in rep["rows"]:
        print(f"{r['parameter']:>12g}  {r['error']:.3e}")
    limit = (2.0 * rep["reference_cell"]) if rep["reference_cell"] else sc.options.tolerances["shock"]
    return EXIT_OK if all(r["error"] <= limit for r in rep["rows"]) else EXIT_BREACH


def cmd_compare(args) -> int:
    sc = load_scenario(args.scenario).with_options(mode=args.mode, reinit=args.reinit)
    rep = compare(sc, args.oracle, args.nx)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "compare.json").write_text(json.dumps(rep, indent=2, default=float) + "\n")
    keys = [k for k in ("max_dX", "max_l1", "conservation_drift", "max_dX_cells") if k in rep]
    print(f"{sc.name} vs {rep['oracle']}: " + ", ".join(f"{k}={rep[k]:.3e}" for k in keys)
          + ("" if rep["ok"] else "  BREACH"))
    for c in rep.get("collisions", []):
        print(f"  collision t*={c['t']!r} (exact {c['t_exact']!r}), |dt*|={c['dt_star']:.3e}")
    return EXIT_OK if rep["ok"] else EXIT_BREACH


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default="out", help="output directory (default: ./out)")
    common.add_argument("--mode", choices=("flow", "appendix"), default=None, help="override options.mode")
    common.add_argument("--reinit", choices=("never", "after-collision", "every-output"), default=None,
                        help="override options.reinit")
    common.add_argument("--jobs", type=int, default=1, help="run batch scenarios in N processes")
    p = argparse.ArgumentParser(prog="eqarea", description="Equal-area solver for 1-D convex scalar conservation laws.")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", parents=[common], help="run scenarios and write CSV/JSON artifacts")
    r.add_argument("scenario", nargs="+", help="scenario YAML files or batch files listing them")
    r.set_defaults(func=cmd_run)
    c = sub.add_parser("convergence", parents=[common], help="shock error against a reference over a ladder")
    c.add_argument("scenario")
    c.add_argument("--ladder", type=float, nargs="+", required=True)
    c.add_argument("--kind", choices=("dt", "n"), default="dt")
    c.add_argument("--t-end", type=float, default=None)
    c.add_argument("--godunov-fallback", action="store_true")
    c.add_argument("--nx", type=int, default=2 ** 14, help="Godunov cells when it is the reference")
    c.set_defaults(func=cmd_convergence)
    k = sub.add_parser("compare", parents=[common], help="compare against an oracle")
    k.add_argument("scenario")
    k.add_argument("--oracle", choices=ORACLES, default=None)
    k.add_argument("--nx", type=int, default=2 ** 14)
    k.set_defaults(func=cmd_compare)
    return p


def main(argv: Optional[list] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, NoOracle) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())

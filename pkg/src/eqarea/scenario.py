"""Scenario files: YAML with flux, profile pieces, output times and options.

Errors name the offending field and, when the YAML parser kept it, the
line it came from.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
import yaml

from .curve import ParametricCurve
from .errors import ConfigError
from .flux import FluxModel, flux_from_name, verify_uniform_convexity
from .profile import PiecewiseProfile, build_profile, piece_from_config

MODES = ("flow", "appendix")
REINIT = ("never", "after-collision", "every-output")
ORACLES = ("triangle", "riemann", "front-tracking", "godunov")

DEFAULT_TOLERANCES = {"conservation": 1e-12, "shock": 1e-10, "profile_l1": 1e-10}


@dataclass(frozen=True)
class Options:
    mode: str = "flow"
    reinit: str = "after-collision"
    n_per_piece: int = 64
    k_per_jump: int = 16
    appendix_order: int = 3
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))


@dataclass
class Scenario:
    name: str
    flux: FluxModel
    profile: PiecewiseProfile
    output_times: np.ndarray
    options: Options
    oracle: Optional[str] = None
    source: Optional[str] = None
    raw: dict = field(default_factory=dict)

    def build_curve(self) -> ParametricCurve:
        return ParametricCurve.from_profile(self.profile, self.flux, self.options.n_per_piece,
                                            self.options.k_per_jump)

    def with_options(self, **kw) -> "Scenario":
        opts = {k: getattr(self.options, k) for k in Options.__dataclass_fields__}
        opts.update({k: v for k, v in kw.items() if v is not None})
        return Scenario(self.name, self.flux, self.profile, self.output_times, Options(**opts),
                        self.oracle, self.source, self.raw)

    def with_times(self, times) -> "Scenario":
        return Scenario(self.name, self.flux, self.profile, np.asarray(times, dtype=float), self.options,
                        self.oracle, self.source, self.raw)

    @property
    def state_interval(self) -> tuple:
        vals = [self.profile.u_left_tail, self.profile.u_right_tail]
        for p in self.profile.finite_pieces:
            vals.extend(np.ravel(np.asarray(p.g(np.linspace(p.x_left, p.x_right, 257)), dtype=float)))
        lo, hi = float(min(vals)), float(max(vals))
        return (lo, hi) if hi > lo else (lo - 1.0, hi + 1.0)


def _line_index(node, path=(), out=None):
    out = {} if out is None else out
    if isinstance(node, yaml.MappingNode):
        for k, v in node.value:
            p = path + (k.value,)
            out[p] = k.start_mark.line + 1
            _line_index(v, p, out)
    elif isinstance(node, yaml.SequenceNode):
        for i, v in enumerate(node.value):
            p = path + (i,)
            out[p] = v.start_mark.line + 1
            _line_index(v, p, out)
    return out


class _Ctx:
    def __init__(self, lines: dict, source: str):
        self.lines = lines
        self.source = source

    def fail(self, path: tuple, msg: str):
        where = ".".join(str(p) for p in path) or "<root>"
        line = None
        for k in range(len(path), -1, -1):
            line = self.lines.get(tuple(path[:k]))
            if line is not None:
                break
        loc = f"{self.source}:{line}" if line else self.source
        raise ConfigError(f"{loc}: field {where}: {msg}")


def _times(spec, ctx: _Ctx) -> np.ndarray:
    path = ("output_times",)
    if spec is None:
        ctx.fail(path, "missing")
    if isinstance(spec, dict):
        try:
            start, stop = float(spec["start"]), float(spec["stop"])
        except (KeyError, TypeError, ValueError):
            ctx.fail(path, "range needs numeric start and stop")
        if "num" in spec:
            times = np.linspace(start, stop, int(spec["num"]))
        elif "step" in spec:
            step = float(spec["step"])
            if not step > 0:
                ctx.fail(path + ("step",), "must be positive")
            n = int(round((stop - start) / step))
            times = start + step * np.arange(n + 1)
            times[-1] = stop if abs(times[-1] - stop) <= 1e-9 * max(1.0, abs(stop)) else times[-1]
        else:
            ctx.fail(path, "range needs num or step")
    else:
        try:
            times = np.asarray([float(v) for v in spec], dtype=float)
        except (TypeError, ValueError):
            ctx.fail(path, "must be a list of numbers or a {start, stop, num|step} range")
    if times.size == 0:
        ctx.fail(path, "empty")
    if not np.all(np.isfinite(times)) or np.any(times < 0):
        ctx.fail(path, "times must be finite and nonnegative")
    if np.any(np.diff(times) <= 0):
        ctx.fail(path, "times must be strictly increasing")
    return times


def scenario_from_dict(data: dict, source: str = "<dict>", lines: Optional[dict] = None) -> Scenario:
    ctx = _Ctx(lines or {}, source)
    if not isinstance(data, dict):
        ctx.fail((), "top level must be a mapping")
    fl = data.get("flux", "burgers")
    if isinstance(fl, str):
        fl = {"name": fl}
    if not isinstance(fl, dict) or "name" not in fl:
        ctx.fail(("flux",), "needs a name")
    try:
        flux = flux_from_name(fl["name"], fl.get("coefficients", []) or [])
    except ConfigError as exc:
        ctx.fail(("flux",), str(exc))
    pieces_spec = data.get("profile")
    if not isinstance(pieces_spec, list) or not pieces_spec:
        ctx.fail(("profile",), "must be a non-empty list of pieces")
    pieces = []
    for i, p in enumerate(pieces_spec):
        try:
            pieces.append(piece_from_config(p))
        except ConfigError as exc:
            ctx.fail(("profile", i), str(exc))
    try:
        profile = build_profile(pieces)
    except ConfigError as exc:
        ctx.fail(("profile",), str(exc))
    times = _times(data.get("output_times"), ctx)
    raw_opts = data.get("options", {}) or {}
    if not isinstance(raw_opts, dict):
        ctx.fail(("options",), "must be a mapping")
    known = set(Options.__dataclass_fields__)
    for k in raw_opts:
        if k not in known:
            ctx.fail(("options", k), f"unknown option; expected one of {sorted(known)}")
    tol = dict(DEFAULT_TOLERANCES)
    for k, v in (raw_opts.get("tolerances") or {}).items():
        try:
            v = float(v)
        except (TypeError, ValueError):
            ctx.fail(("options", "tolerances", k), "must be a number")
        if not v > 0:
            ctx.fail(("options", "tolerances", k), "must be positive")
        tol[k] = v
    opts = Options(
        mode=raw_opts.get("mode", "flow"),
        reinit=raw_opts.get("reinit", "after-collision"),
        n_per_piece=int(raw_opts.get("n_per_piece", 64)),
        k_per_jump=int(raw_opts.get("k_per_jump", 16)),
        appendix_order=int(raw_opts.get("appendix_order", 3)),
        tolerances=tol,
    )
    if opts.mode not in MODES:
        ctx.fail(("options", "mode"), f"expected one of {MODES}")
    if opts.reinit not in REINIT:
        ctx.fail(("options", "reinit"), f"expected one of {REINIT}")
    if opts.n_per_piece < 2 or opts.k_per_jump < 2:
        ctx.fail(("options",), "n_per_piece and k_per_jump must be at least 2")
    oracle = data.get("oracle")
    if oracle is not None and oracle not in ORACLES:
        ctx.fail(("oracle",), f"expected one of {ORACLES}")
    sc = Scenario(str(data.get("name", Path(source).stem)), flux, profile, times, opts, oracle, source, data)
    rep = verify_uniform_convexity(flux, sc.state_interval)
    if not rep.ok:
        ctx.fail(("flux",), f"not uniformly convex on {sc.state_interval} (min F'' = {rep.alpha_estimate})")
    return sc


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read ({exc.strerror})") from None
    try:
        node = yaml.compose(text)
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = f":{mark.line + 1}" if mark is not None else ""
        raise ConfigError(f"{path}{line}: YAML parse error: {getattr(exc, 'problem', exc)}") from None
    return scenario_from_dict(data, str(path), _line_index(node) if node is not None else {})


def window_for(scenario: Scenario, t_end: float) -> tuple:
    """An x-window containing every non-constant feature up to ``t_end``."""
    lo, hi = scenario.profile.support
    a, b = scenario.state_interval
    c = float(np.max(np.abs(scenario.flux.dF(np.array([a, b])))))
    pad = c * t_end + 1.0
    return (lo - pad, hi + pad)


def conserved_mass(scenario: Scenario, t: float, window: tuple) -> float:
    """Exact ``int u dx`` over ``window`` at time ``t`` (constant tails flux mass in and out)."""
    m0 = scenario.profile.integrate(*window)
    F = scenario.flux.F
    return m0 + t * (F(scenario.profile.u_left_tail) - F(scenario.profile.u_right_tail))


def mass_scale(scenario: Scenario, t_end: float, window: tuple) -> float:
    m = abs(scenario.profile.integrate(*window))
    F = scenario.flux.F
    return max(1.0, m, abs(t_end * (F(scenario.profile.u_left_tail) - F(scenario.profile.u_right_tail))))


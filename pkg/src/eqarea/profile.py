"""Piecewise-smooth initial conditions and their parametric node sets.

A profile is an ordered tiling of the real line by pieces.  The first and
last pieces are constant tails; jumps between neighbouring pieces become
vertical segments of the initial parametric curve.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import ConfigError, NonFiniteError, SpecError
from .flux import EPS_U
from .interpolate import adaptive_quadrature


@dataclass(frozen=True)
class Piece:
    x_left: float
    x_right: float
    g: Callable
    dg: Callable
    G: Optional[Callable] = None
    constant: Optional[float] = None
    label: str = ""

    def integrate(self, a: float, b: float) -> float:
        """Exact integral of ``g`` over ``[a, b]`` inside the piece."""
        if a == b:
            return 0.0
        if self.constant is not None:
            return self.constant * (b - a)
        if self.G is not None:
            return float(self.G(b) - self.G(a))
        return adaptive_quadrature(self.g, a, b, tol=1e-12)


def constant_piece(value: float, x_left: float, x_right: float) -> Piece:
    c = float(value)
    return Piece(
        x_left, x_right,
        g=lambda x: c * np.ones_like(x, dtype=float) if np.ndim(x) else c,
        dg=lambda x: np.zeros_like(x, dtype=float) if np.ndim(x) else 0.0,
        G=lambda x: c * x,
        constant=c,
        label=f"constant {c!r}",
    )


def polynomial_piece(coefficients: Sequence[float], x_left: float, x_right: float) -> Piece:
    """``g(x) = sum(c[i] * x**i)`` in absolute coordinates."""
    c = [float(v) for v in coefficients]
    if not c:
        raise ConfigError("polynomial piece needs at least one coefficient")
    if len(c) == 1:
        return constant_piece(c[0], x_left, x_right)
    dc = [i * c[i] for i in range(1, len(c))]
    ic = [0.0] + [c[i] / (i + 1) for i in range(len(c))]

    def horner(coef):
        def f(x):
            acc = coef[-1] * np.ones_like(x, dtype=float) if np.ndim(x) else coef[-1]
            for ci in coef[-2::-1]:
                acc = acc * x + ci
            return acc
        return f

    return Piece(x_left, x_right, g=horner(c), dg=horner(dc), G=horner(ic), label=f"polynomial {c}")


_EXPR_NAMESPACE = {
    "sin": np.sin, "cos": np.cos, "tan": np.tan, "arctan": np.arctan, "atan": np.arctan,
    "arcsin": np.arcsin, "arccos": np.arccos, "exp": np.exp, "log": np.log, "sqrt": np.sqrt,
    "sinh": np.sinh, "cosh": np.cosh, "tanh": np.tanh, "abs": np.abs, "pi": math.pi, "e": math.e,
}


def compile_expression(text: str) -> Callable:
    """Turn ``text`` (a function of ``x``) into a vectorized callable."""
    try:
        code = compile(text, "<expression>", "eval")
    except SyntaxError as exc:
        raise ConfigError(f"cannot parse expression {text!r}: {exc.msg}") from None
    unknown = set(code.co_names) - set(_EXPR_NAMESPACE) - {"x"}
    if unknown:
        raise ConfigError(f"expression {text!r} uses unknown names {sorted(unknown)}")
    ns = {"__builtins__": {}, **_EXPR_NAMESPACE}

    def f(x):
        return eval(code, ns, {"x": x})

    return f


def expression_piece(expression: str, derivative: str, x_left: float, x_right: float,
                     antiderivative: Optional[str] = None) -> Piece:
    return Piece(
        x_left, x_right,
        g=compile_expression(expression),
        dg=compile_expression(derivative),
        G=compile_expression(antiderivative) if antiderivative else None,
        label=f"expression {expression!r}",
    )


def _as_bound(v) -> float:
    if isinstance(v, str):
        try:
            return float(v.strip().lower().replace("infinity", "inf"))
        except ValueError:
            raise ConfigError(f"bad domain bound {v!r}") from None
    return float(v)


def piece_from_config(cfg: dict) -> Piece:
    """Build a piece from ``{type, domain, value|coefficients|expression...}``."""
    if not isinstance(cfg, dict):
        raise ConfigError(f"piece must be a mapping, got {cfg!r}")
    kind = cfg.get("type")
    try:
        lo, hi = (_as_bound(b) for b in cfg["domain"])
    except (KeyError, TypeError, ValueError):
        raise ConfigError(f"piece {cfg!r} needs domain: [x_left, x_right]") from None
    if kind == "constant":
        if "value" not in cfg:
            raise ConfigError("constant piece needs 'value'")
        return constant_piece(cfg["value"], lo, hi)
    if kind in ("linear", "polynomial"):
        coef = cfg.get("coefficients")
        if coef is None or (kind == "linear" and len(coef) != 2):
            raise ConfigError(f"{kind} piece needs coefficients (ascending powers of x)")
        return polynomial_piece(coef, lo, hi)
    if kind == "expression":
        if "expression" not in cfg or "derivative" not in cfg:
            raise ConfigError("expression piece needs 'expression' and 'derivative'")
        return expression_piece(cfg["expression"], cfg["derivative"], lo, hi, cfg.get("antiderivative"))
    raise ConfigError(f"unknown piece type {kind!r}")


@dataclass(frozen=True)
class Jump:
    x: float
    u_left: float
    u_right: float

    @property
    def kind(self) -> str:
        return "down" if self.u_left > self.u_right else "up"

    @property
    def size(self) -> float:
        return abs(self.u_left - self.u_right)


@dataclass(frozen=True)
class PiecewiseProfile:
    pieces: tuple
    jumps: tuple
    kinks: tuple
    support: tuple

    @property
    def u_left_tail(self) -> float:
        return self.pieces[0].constant

    @property
    def u_right_tail(self) -> float:
        return self.pieces[-1].constant

    @property
    def finite_pieces(self) -> tuple:
        return tuple(p for p in self.pieces if math.isfinite(p.x_left) and math.isfinite(p.x_right))

    def __call__(self, x):
        """Evaluate ``g``; right-continuous at breakpoints."""
        x = np.asarray(x, dtype=float)
        out = np.empty_like(x)
        bounds = np.array([p.x_left for p in self.pieces[1:]])
        idx = np.searchsorted(bounds, x, side="right")
        for i, p in enumerate(self.pieces):
            m = idx == i
            if np.any(m):
                out[m] = p.g(x[m])
        return out if out.ndim else float(out)

    def integrate(self, a: float, b: float) -> float:
        """Exact integral of ``g`` over ``[a, b]``."""
        if b < a:
            return -self.integrate(b, a)
        total = []
        for p in self.pieces:
            lo, hi = max(a, p.x_left), min(b, p.x_right)
            if lo < hi:
                total.append(p.integrate(lo, hi))
        return math.fsum(total)


def _check_piece(p: Piece, h_rel: float = 1e-5):
    xs = np.linspace(p.x_left, p.x_right, 17)
    g = np.asarray(p.g(xs), dtype=float) * np.ones_like(xs)
    dg = np.asarray(p.dg(xs), dtype=float) * np.ones_like(xs)
    if not (np.all(np.isfinite(g)) and np.all(np.isfinite(dg))):
        raise NonFiniteError(f"non-finite value in {p.label} on [{p.x_left}, {p.x_right}]")
    inner = xs[1:-1]
    h = h_rel * max(1.0, float(np.max(np.abs(inner))), p.x_right - p.x_left)
    h = min(h, 0.25 * (inner[0] - xs[0]))
    fd = (p.g(inner + h) - p.g(inner - h)) / (2 * h)
    if np.any(np.abs(fd - p.dg(inner)) > 1e-6 * np.maximum(1.0, np.abs(p.dg(inner)))):
        raise SpecError(f"derivative of {p.label} inconsistent with finite differences")
    if p.G is not None and p.constant is None:
        fdG = (p.G(inner + h) - p.G(inner - h)) / (2 * h)
        if np.any(np.abs(fdG - p.g(inner)) > 1e-6 * np.maximum(1.0, np.abs(p.g(inner)))):
            raise SpecError(f"antiderivative of {p.label} inconsistent with finite differences")


def build_profile(pieces: Sequence, check: bool = True) -> PiecewiseProfile:
    """Validate a tiling of the line and detect jumps between pieces.

    ``pieces`` may be :class:`Piece` objects or config mappings.  The first
    and last pieces must be constant tails reaching to -inf and +inf.
    """
    ps = [p if isinstance(p, Piece) else piece_from_config(p) for p in pieces]
    if not ps:
        raise SpecError("profile needs at least one piece")
    if ps[0].x_left != -math.inf or ps[-1].x_right != math.inf:
        raise SpecError("profile must start at -inf and end at +inf with constant tails")
    if ps[0].constant is None or ps[-1].constant is None:
        raise SpecError("unbounded tails must be constant pieces")
    for a, b in zip(ps[:-1], ps[1:]):
        if a.x_right != b.x_left:
            what = "overlap" if a.x_right > b.x_left else "gap"
            raise SpecError(f"{what} between pieces at {a.x_right} / {b.x_left}")
    for p in ps[1:-1]:
        if not p.x_left < p.x_right:
            raise SpecError(f"empty or reversed piece [{p.x_left}, {p.x_right}]")
        if check:
            _check_piece(p)
    jumps, kinks = [], []
    for a, b in zip(ps[:-1], ps[1:]):
        x = a.x_right
        ul, ur = float(a.g(x)), float(b.g(x))
        if not (math.isfinite(ul) and math.isfinite(ur)):
            raise NonFiniteError(f"non-finite value at breakpoint {x}")
        if abs(ul - ur) > EPS_U:
            jumps.append(Jump(x, ul, ur))
        elif abs(float(a.dg(x)) - float(b.dg(x))) > EPS_U:
            kinks.append(x)
    if len(ps) == 1:
        support = (0.0, 0.0)
    else:
        support = (ps[0].x_right, ps[-1].x_left)
    return PiecewiseProfile(tuple(ps), tuple(jumps), tuple(kinks), support)


@dataclass
class NodeSet:
    """Initial parametric nodes and exact per-interval areas.

    ``sources[i]`` tells which piece (``("piece", k)``) or jump
    (``("jump", k)``) interval ``i`` belongs to.  ``du`` is the right-sided
    derivative of ``u`` along ``s`` and ``du_left`` the left-sided one.
    """
    s: np.ndarray
    x0: np.ndarray
    u: np.ndarray
    du: np.ndarray
    du_left: np.ndarray
    kind: list
    areas: np.ndarray
    sources: list = field(default_factory=list)

    def __len__(self):
        return self.s.size


def sample_nodes(profile: PiecewiseProfile, n_per_piece: int = 64, k_per_jump: int = 16) -> NodeSet:
    if n_per_piece < 2 or k_per_jump < 2:
        raise ValueError("n_per_piece and k_per_jump must be >= 2")
    ps = profile.pieces
    jumps = {j.x: (k, j) for k, j in enumerate(profile.jumps)}
    s, x0, u, du, dul, kind, areas, sources = [], [], [], [], [], [], [], []

    def add_node(xv, uv, d_left, d_right, k, ds):
        s.append(s[-1] + ds if s else 0.0)
        x0.append(xv)
        u.append(uv)
        dul.append(d_left)
        du.append(d_right)
        kind.append(k)

    def add_jump(jk, j: Jump, first: bool):
        sgn = 1.0 if j.u_right > j.u_left else -1.0
        us = np.linspace(j.u_left, j.u_right, k_per_jump)
        us[0], us[-1] = j.u_left, j.u_right
        top, bottom = ("jump-top", "jump-bottom") if sgn < 0 else ("jump-bottom", "jump-top")
        if first:
            add_node(j.x, us[0], 0.0, sgn, top, 0.0)
        else:
            du[-1] = sgn
            kind[-1] = top
        for i in range(1, k_per_jump):
            areas.append(0.0)
            sources.append(("jump", jk))
            add_node(j.x, float(us[i]), sgn, sgn, bottom if i == k_per_jump - 1 else "jump-inner",
                     float(us[i] - us[i - 1]) * sgn)

    if len(ps) == 1:
        add_node(0.0, ps[0].constant, 0.0, 0.0, "interior", 0.0)
    if len(ps) > 1 and ps[0].x_right in jumps:
        jk, j = jumps[ps[0].x_right]
        add_jump(jk, j, first=True)
    for pk, p in enumerate(ps):
        if pk == 0 or pk == len(ps) - 1:
            continue
        xs = np.linspace(p.x_left, p.x_right, n_per_piece)
        xs[0], xs[-1] = p.x_left, p.x_right
        gs = np.asarray(p.g(xs), dtype=float) * np.ones_like(xs)
        ds = np.asarray(p.dg(xs), dtype=float) * np.ones_like(xs)
        start = 0
        if s:
            # continuous join with the previous piece or the bottom of a vertical
            du[-1] = float(ds[0])
            start = 1
        for i in range(start, n_per_piece):
            if i > 0:
                areas.append(p.integrate(float(xs[i - 1]), float(xs[i])))
                sources.append(("piece", pk))
            add_node(float(xs[i]), float(gs[i]), float(ds[i]), float(ds[i]), "interior",
                     float(xs[i] - xs[i - 1]) if i > 0 else 0.0)
        if p.x_right in jumps:
            jk, j = jumps[p.x_right]
            add_jump(jk, j, first=False)
    if not s:
        add_node(profile.support[0], profile.u_left_tail, 0.0, 0.0, "interior", 0.0)
    return NodeSet(
        s=np.array(s), x0=np.array(x0), u=np.array(u), du=np.array(du), du_left=np.array(dul),
        kind=kind, areas=np.array(areas), sources=sources,
    )

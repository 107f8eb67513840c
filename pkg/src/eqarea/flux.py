"""Flux functions and the quantities derived from them.

Every module talks to the flux through :class:`FluxModel`, which bundles
``F``, ``F'``, ``F''``, the inverse of ``F'`` and the Legendre term
``u F'(u) - F(u)``.  All callables accept floats or numpy arrays.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import optimize

from .errors import BracketError, ConfigError, DegenerateJump

#: jumps smaller than this are treated as continuous
EPS_U = 1e-12


@dataclass(frozen=True)
class FluxModel:
    name: str
    F: Callable
    dF: Callable
    d2F: Callable
    invDF_closed: Optional[Callable] = None
    legendre_closed: Optional[Callable] = None
    coefficients: tuple = field(default=())

    def invDF(self, v):
        """Inverse of ``F'``; numeric fallback when no closed form was supplied."""
        if self.invDF_closed is not None:
            return self.invDF_closed(v)
        if np.ndim(v) == 0:
            return _invert_expanding(self, float(v))
        return np.array([_invert_expanding(self, float(vi)) for vi in np.ravel(v)]).reshape(np.shape(v))

    def legendre(self, u):
        if self.legendre_closed is not None:
            return self.legendre_closed(u)
        return self.dF(u) * u - self.F(u)

    @property
    def has_closed_inverse(self) -> bool:
        return self.invDF_closed is not None


def burgers() -> FluxModel:
    return FluxModel(
        name="burgers",
        F=lambda u: u * u / 2,
        dF=lambda u: u * 1.0,
        d2F=lambda u: np.ones_like(u, dtype=float) if np.ndim(u) else 1.0,
        invDF_closed=lambda v: v * 1.0,
        legendre_closed=lambda u: u * u / 2,
    )


def quadratic(a: float = 1.0, b: float = 1.0) -> FluxModel:
    """``F = a u^2 / 2 + b u`` with ``a > 0``."""
    if not a > 0:
        raise ConfigError(f"quadratic flux needs a > 0, got {a}")
    return FluxModel(
        name="quadratic",
        F=lambda u: 0.5 * a * u * u + b * u,
        dF=lambda u: a * u + b,
        d2F=lambda u: a * np.ones_like(u, dtype=float) if np.ndim(u) else float(a),
        invDF_closed=lambda v: (v - b) / a,
        legendre_closed=lambda u: 0.5 * a * u * u,
        coefficients=(a, b),
    )


def exponential(c: float = 1.0, k: float = 1.0) -> FluxModel:
    """``F = c exp(k u)`` with ``c, k > 0``."""
    if not (c > 0 and k > 0):
        raise ConfigError(f"exponential flux needs c, k > 0, got {c}, {k}")

    def inv(v):
        return np.log(np.asarray(v, dtype=float) / (c * k)) / k if np.ndim(v) else math.log(v / (c * k)) / k

    return FluxModel(
        name="exponential",
        F=lambda u: c * np.exp(k * u),
        dF=lambda u: c * k * np.exp(k * u),
        d2F=lambda u: c * k * k * np.exp(k * u),
        invDF_closed=inv,
        legendre_closed=lambda u: c * np.exp(k * u) * (k * u - 1.0),
        coefficients=(c, k),
    )


def custom(name: str, F, dF, d2F, invDF=None, legendre=None) -> FluxModel:
    """Wrap user callbacks; a missing ``invDF`` uses :func:`inv_dflux_numeric`."""
    return FluxModel(name=name, F=F, dF=dF, d2F=d2F, invDF_closed=invDF, legendre_closed=legendre)


_REGISTRY = {"burgers": burgers, "quadratic": quadratic, "exponential": exponential}


def flux_from_name(name: str, coefficients: Sequence[float] = ()) -> FluxModel:
    try:
        factory = _REGISTRY[name]
    except KeyError:
        raise ConfigError(f"unknown flux {name!r}; choose from {sorted(_REGISTRY)}") from None
    try:
        return factory(*[float(c) for c in coefficients])
    except TypeError as exc:
        raise ConfigError(f"bad coefficients for flux {name!r}: {list(coefficients)}") from exc


def rh_speed(model: FluxModel, uL: float, uR: float) -> float:
    """Rankine-Hugoniot speed of a jump from ``uL`` to ``uR``."""
    if abs(uL - uR) <= EPS_U:
        raise DegenerateJump(f"jump {uL} -> {uR} below {EPS_U}")
    return (model.F(uL) - model.F(uR)) / (uL - uR)


@dataclass(frozen=True)
class ConvexityReport:
    alpha_estimate: float
    ok: bool


def verify_uniform_convexity(model: FluxModel, interval, n_samples: int = 100) -> ConvexityReport:
    """Sample ``F''`` on ``interval`` and refine the smallest sample locally.

    ``ok`` requires the minimum to clear a round-off floor relative to the
    largest sampled curvature, so a flux whose curvature only vanishes at a
    point between samples (``u**4`` at 0) is still rejected.
    """
    lo, hi = float(interval[0]), float(interval[1])
    if not lo < hi or n_samples < 2:
        raise ValueError("need u_min < u_max and n_samples >= 2")
    us = np.linspace(lo, hi, n_samples)
    d2 = np.asarray(model.d2F(us), dtype=float) * np.ones_like(us)
    i = int(np.argmin(d2))
    alpha = float(d2[i])
    a, b = us[max(i - 1, 0)], us[min(i + 1, n_samples - 1)]
    res = optimize.minimize_scalar(lambda u: float(model.d2F(u)), bounds=(a, b), method="bounded",
                                   options={"xatol": 1e-12})
    if res.success and res.fun < alpha:
        alpha = float(res.fun)
    floor = math.sqrt(np.finfo(float).eps) * max(1.0, float(np.max(np.abs(d2))))
    return ConvexityReport(alpha_estimate=alpha, ok=bool(alpha > floor))


def inv_dflux_numeric(model: FluxModel, v: float, bracket) -> float:
    """Solve ``F'(u) = v`` on ``bracket`` (``F'`` is increasing)."""
    lo, hi = float(bracket[0]), float(bracket[1])
    flo, fhi = model.dF(lo) - v, model.dF(hi) - v
    if flo > 0 or fhi < 0:
        raise BracketError(f"speed {v} outside [{model.dF(lo)}, {model.dF(hi)}]")
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    u = optimize.brentq(lambda w: model.dF(w) - v, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=200)
    # Newton polish; F'' > 0 so the step is well defined
    for _ in range(2):
        r = model.dF(u) - v
        d = model.d2F(u)
        if d <= 0 or r == 0:
            break
        step = r / d
        cand = u - step
        if lo <= cand <= hi and abs(model.dF(cand) - v) < abs(r):
            u = cand
        else:
            break
    return float(u)


def _invert_expanding(model: FluxModel, v: float) -> float:
    lo, hi = -1.0, 1.0
    for _ in range(200):
        if model.dF(lo) <= v <= model.dF(hi):
            return inv_dflux_numeric(model, v, (lo, hi))
        if model.dF(lo) > v:
            lo *= 2.0
        if model.dF(hi) < v:
            hi *= 2.0
    raise BracketError(f"could not bracket F'(u) = {v}")

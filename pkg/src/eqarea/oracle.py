"""Independent reference solutions.

None of these touch the parametric curve: closed forms, exact Riemann
solutions, event-exact front tracking for piecewise-constant data, and a
first-order Godunov scheme.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import CFLViolation, ConfigError, UnsupportedData
from .flux import FluxModel
from .profile import PiecewiseProfile


def triangle_exact(t: float):
    """Shock position and the two branches for the unit ramp-with-drop under Burgers."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    X = math.sqrt(1.0 + t)

    def left(x):
        return np.asarray(x, dtype=float) / (1.0 + t)

    def right(x):
        return np.zeros_like(np.asarray(x, dtype=float))

    return X, left, right


def riemann_exact(flux: FluxModel, uL, uR, t: float, x):
    """Entropy solution of a single jump at the origin, vectorized over ``x`` and the states."""
    if not t > 0:
        raise ValueError("t must be positive")
    x = np.asarray(x, dtype=float)
    uL = np.asarray(uL, dtype=float)
    uR = np.asarray(uR, dtype=float)
    xi = x / t
    shape = np.broadcast(xi, uL, uR).shape
    xi, uL, uR = (np.broadcast_to(a, shape) for a in (xi, uL, uR))
    out = np.empty(shape)
    shock = uL > uR
    same = uL == uR
    fan = ~(shock | same)
    out[same] = uL[same]
    if np.any(shock):
        a, b = uL[shock], uR[shock]
        sigma = (flux.F(a) - flux.F(b)) / (a - b)
        out[shock] = np.where(xi[shock] < sigma, a, b)
    if np.any(fan):
        a, b, z = uL[fan], uR[fan], xi[fan]
        lo, hi = flux.dF(a), flux.dF(b)
        inside = (z > lo) & (z < hi)
        v = np.where(z <= lo, a, b).astype(float)
        if np.any(inside):
            v[inside] = flux.invDF(z[inside])
        out[fan] = v
    return out if out.ndim else float(out)


# {{{ front tracking

@dataclass
class Front:
    id: int
    x0: object       # position at t_birth
    t_birth: object
    uL: object
    uR: object
    speed: object

    def at(self, t):
        return self.x0 + self.speed * (t - self.t_birth)


@dataclass
class FrontEvent:
    t: object
    x: object
    parents: tuple
    child: int


@dataclass
class FrontTrackingResult:
    t: object
    fronts: list
    events: list = field(default_factory=list)

    def positions(self):
        return [f.at(self.t) for f in self.fronts]

    def mass(self, xa, xb, states):
        """``int u dx`` over ``[xa, xb]`` given the ordered states between fronts."""
        xs = [xa] + self.positions() + [xb]
        return sum(u * (b - a) for u, a, b in zip(states, xs[:-1], xs[1:]))


def front_tracking_exact(jumps: Sequence, states: Sequence, F, t) -> FrontTrackingResult:
    """Exact Rankine-Hugoniot evolution of piecewise-constant, decreasing data.

    ``jumps`` are the initial jump positions and ``states`` the ``len(jumps)+1``
    constant values from left to right.  ``F`` is the flux callable.  All
    arithmetic stays in the input number type, so ``Fraction`` data gives
    exact event times.
    """
    if len(states) != len(jumps) + 1:
        raise ValueError("need one more state than jumps")
    fronts = []
    zero = t - t
    for k, x in enumerate(jumps):
        a, b = states[k], states[k + 1]
        if a < b:
            raise UnsupportedData(f"up-jump {a} -> {b} at x = {x}; only shocks are tracked")
        if a == b:
            continue
        fronts.append(Front(k, x, zero, a, b, (F(a) - F(b)) / (a - b)))
    next_id = len(jumps)
    now = zero
    events = []
    while True:
        best = None
        for i in range(len(fronts) - 1):
            f, g = fronts[i], fronts[i + 1]
            if f.speed > g.speed:
                tc = now + (g.at(now) - f.at(now)) / (f.speed - g.speed)
                if best is None or tc < best:
                    best = tc
        if best is None or best > t:
            break
        now = best
        merged = []
        i = 0
        while i < len(fronts):
            j = i
            while j + 1 < len(fronts) and fronts[j + 1].at(now) == fronts[i].at(now):
                j += 1
            if j > i:
                grp = fronts[i:j + 1]
                a, b = grp[0].uL, grp[-1].uR
                x = grp[0].at(now)
                nf = Front(next_id, x, now, a, b, (F(a) - F(b)) / (a - b))
                events.append(FrontEvent(now, x, tuple(g.id for g in grp), next_id))
                next_id += 1
                merged.append(nf)
            else:
                merged.append(fronts[i])
            i = j + 1
        fronts = merged
    return FrontTrackingResult(t, fronts, events)


def piecewise_constant_data(profile: PiecewiseProfile):
    """Jump positions and states of a profile made only of constant pieces."""
    if any(p.constant is None for p in profile.pieces):
        raise UnsupportedData("profile has non-constant pieces")
    jumps = [j.x for j in profile.jumps]
    states = [profile.pieces[0].constant] + [j.u_right for j in profile.jumps]
    return jumps, states

# }}}


# {{{ Godunov

@dataclass
class GridSolution:
    x: np.ndarray      # cell centres
    u: np.ndarray
    dx: float
    t: float
    steps: int
    mass0: float
    mass: float
    boundary_flux: float   # time-integrated inflow minus outflow

    @property
    def mass_drift(self) -> float:
        return self.mass - self.mass0 - self.boundary_flux

    def shock_position(self, window: Optional[tuple] = None) -> float:
        """Interface with the steepest drop between neighbouring cells."""
        d = np.diff(self.u)
        xf = 0.5 * (self.x[:-1] + self.x[1:])
        if window is not None:
            d = np.where((xf >= window[0]) & (xf <= window[1]), d, 0.0)
        return float(xf[int(np.argmin(d))])


def cell_averages(profile: PiecewiseProfile, edges: np.ndarray) -> np.ndarray:
    """Exact cell averages from the piecewise antiderivatives."""
    cum = np.zeros_like(edges)
    ref = edges[0]
    for p in profile.pieces:
        lo = max(p.x_left, ref)
        if p.x_right <= lo:
            continue
        clip = np.clip(edges, lo, p.x_right)
        if p.constant is not None:
            cum += p.constant * (clip - lo)
        elif p.G is not None:
            cum += np.asarray(p.G(clip), dtype=float) - float(p.G(lo))
        else:
            cum += np.array([p.integrate(lo, c) for c in clip])
    return np.diff(cum) / np.diff(edges)


def godunov_flux(flux: FluxModel, uL: np.ndarray, uR: np.ndarray) -> np.ndarray:
    """Flux of the exact Riemann solution sampled on the interface."""
    return flux.F(riemann_exact(flux, uL, uR, 1.0, 0.0 * uL))


def godunov_reference(scenario, nx: int, cfl: float, t_end: float, domain: Optional[tuple] = None) -> GridSolution:
    """First-order Godunov solution with zero-gradient boundaries.

    ``scenario`` needs ``flux`` and ``profile``.  The default domain pads
    the profile support by the widest characteristic excursion.
    """
    if nx < 16:
        raise ConfigError(f"need nx >= 16, got {nx}")
    if not 0 < cfl <= 0.9:
        raise CFLViolation(f"cfl must lie in (0, 0.9], got {cfl}")
    flux, profile = scenario.flux, scenario.profile
    if domain is None:
        lo, hi = profile.support
        vals = [profile.u_left_tail, profile.u_right_tail]
        for p in profile.finite_pieces:
            vals.extend(np.asarray(p.g(np.linspace(p.x_left, p.x_right, 257)), dtype=float).ravel())
        cmax = float(np.max(np.abs(flux.dF(np.asarray(vals)))))
        pad = cmax * t_end + 1.0
        domain = (lo - pad, hi + pad)
    edges = np.linspace(domain[0], domain[1], nx + 1)
    dx = float(edges[1] - edges[0])
    u = cell_averages(profile, edges)
    x = 0.5 * (edges[:-1] + edges[1:])
    mass0 = math.fsum(u * dx)
    t = 0.0
    steps = 0
    inflow = []
    while t < t_end:
        ug = np.concatenate([[u[0]], u, [u[-1]]])
        speed = float(np.max(np.abs(flux.dF(ug))))
        dt = cfl * dx / speed if speed > 0 else t_end - t
        dt = min(dt, t_end - t)
        if speed * dt > dx * (1 + 1e-12):
            raise CFLViolation(f"step {steps}: {speed * dt / dx:.3f} > 1")
        f = godunov_flux(flux, ug[:-1], ug[1:])
        u = u - dt / dx * np.diff(f)
        inflow.append(dt * (f[0] - f[-1]))
        t += dt
        steps += 1
    return GridSolution(x, u, dx, t, steps, mass0, math.fsum(u * dx), math.fsum(inflow))

# }}}

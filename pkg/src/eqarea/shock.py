"""Shock lifecycle on top of the exact flow.

A shock is a cut ``(s0, s1)`` of the flowed curve with ``x(s0) = x(s1)``
and zero parametric area in between.  Shocks are located per fold
(S-shaped folds first, lower envelope otherwise), threaded through time
by the nesting of their swallowed parameter intervals, and merged when
one interval swallows two earlier ones.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import optimize

from .curve import ParametricCurve, VerticalSegment
from .errors import (DegenerateJump, MultipleRoots, NoRoot, NoRootInBracket, NotSCurve,
                     ProjectionInconsistent, SolverError)
from .flux import EPS_U, FluxModel, rh_speed
from .geometry import (Branch, OverturnRegion, crossing_count, equal_area_pairs, fold_regions,
                       invert_branch, monotone_branches, neighbours, signed_area_root)
from .interpolate import Polynomial, hermite_interpolate, poly_roots_in_interval

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class ShockRecord:
    t: float
    X: float
    uL: float
    uR: float
    speed: float
    provenance: str = "isolated"
    id: int = -1
    parents: tuple = ()
    s0: float = math.nan
    s1: float = math.nan
    residual: float = 0.0
    scale: float = 1.0

    @property
    def lax_ok(self) -> bool:
        return self.uL > self.uR + EPS_U

    def lax_speeds_ok(self, flux: FluxModel) -> bool:
        return bool(flux.dF(self.uR) < self.speed < flux.dF(self.uL))


@dataclass(frozen=True)
class CollisionEvent:
    t: float
    X: float
    parents: tuple
    child: int
    bracket: tuple


@dataclass
class WeakSolutionView:
    """Single-valued arcs of the flowed curve with shocks between them."""
    curve: ParametricCurve
    t: float
    shocks: list
    arcs: list          # (s_lo, s_hi) per arc, tails open
    arc_branches: list  # forward branch containing each arc
    method: str = "identity"
    dropped: list = field(default_factory=list)

    def arc_x_ranges(self):
        out = []
        for (a, b) in self.arcs:
            xa = -math.inf if a == -math.inf else self.curve.x(a, self.t)
            xb = math.inf if b == math.inf else self.curve.x(b, self.t)
            out.append((xa, xb))
        return out

    def _arc_of(self, x: float) -> int:
        cuts = [sh.X for sh in self._cuts()]
        return int(np.searchsorted(cuts, x, side="right"))

    def _cuts(self):
        return sorted(self.shocks + self.dropped, key=lambda r: r.s0)

    def evaluate(self, x):
        """Solution value(s); right-continuous at shocks."""
        xs = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.empty_like(xs)
        for i, xi in enumerate(xs):
            k = self._arc_of(float(xi))
            s = invert_branch(self.curve, self.t, self.arc_branches[k], float(xi))
            out[i] = self.curve.point(s, self.t)[1]
        return out if np.ndim(x) else float(out[0])

    def window_area(self, xa: float, xb: float) -> float:
        """``int_{xa}^{xb} u dx`` of the projected solution."""
        parts = []
        for (a, b), br, (xl, xr) in zip(self.arcs, self.arc_branches, self.arc_x_ranges()):
            p, q = max(xa, xl), min(xb, xr)
            if q <= p:
                continue
            sp = invert_branch(self.curve, self.t, br, p)
            sq = invert_branch(self.curve, self.t, br, q)
            parts.append(self.curve.area(sq, self.t) - self.curve.area(sp, self.t))
        return math.fsum(parts)


# {{{ locating

def _newton_pair(curve: ParametricCurve, t: float, s0: float, s1: float, P: Branch, N: Branch,
                 iters: int = 12):
    """Newton on ``x(s0) = x(s1)``, ``A(s0) = A(s1)``; None when it leaves the branches."""
    for _ in range(iters):
        x0, u0 = curve.point(s0, t)
        x1, u1 = curve.point(s1, t)
        f1 = x0 - x1
        f2 = curve.area(s0, t) - curve.area(s1, t)
        xs0 = curve.x_s(s0, t, side="left" if s0 == P.s_b else None)
        xs1 = curve.x_s(s1, t, side="right")
        if not (u0 > u1 and xs0 > 0 and xs1 > 0):
            return None
        a = (u1 * f1 - f2) / (u0 - u1)
        d0, d1 = a / xs0, (a + f1) / xs1
        s0, s1 = s0 + d0, s1 + d1
        if not (P.s_a <= s0 <= P.s_b and N.s_a <= s1 <= N.s_b):
            return None
        if abs(d0) + abs(d1) <= 4 * _EPS * (1.0 + abs(s0) + abs(s1)):
            return s0, s1
    return s0, s1


def _record(curve: ParametricCurve, t: float, s0: float, s1: float, X: float, scale: float) -> ShockRecord:
    uL = curve.point(s0, t)[1]
    uR = curve.point(s1, t)[1]
    try:
        speed = rh_speed(curve.flux, uL, uR)
    except DegenerateJump:
        speed = float(curve.flux.dF(uL))
    residual = curve.area(s0, t) - curve.area(s1, t)
    return ShockRecord(t=t, X=X, uL=uL, uR=uR, speed=float(speed), s0=s0, s1=s1,
                       residual=residual, scale=scale)


def locate_shock(curve: ParametricCurve, t: float, region: OverturnRegion, guess: Optional[tuple] = None,
                 branches: Optional[list] = None) -> ShockRecord:
    """Equal-area shock of one S-shaped fold.

    ``guess`` is an optional ``(s0, s1)`` pair (typically the previous
    time's cut) used to warm-start a Newton solve; otherwise, or if that
    fails, the signed area is bracketed over the fold and solved by Brent.
    """
    branches = branches if branches is not None else monotone_branches(curve, t)
    if region.standing:
        X = curve.x(region.s_lo, t)
        return _record(curve, t, region.s_lo, region.s_hi, X, region.area_scale)
    P, inner, N = neighbours(branches, region)
    if len(inner) != 1 or inner[0].sign >= 0:
        raise NotSCurve("fold is not a single backward branch")
    pair = None
    if guess is not None:
        g0 = min(max(guess[0], P.s_a), P.s_b)
        g1 = min(max(guess[1], N.s_a), N.s_b)
        pair = _newton_pair(curve, t, g0, g1, P, N)
    if pair is not None:
        s0, s1 = pair
        X = curve.x(s0, t)
        if not region.x_fold_left < X < region.x_fold_right:
            pair = None
    if pair is None:
        P, inner, N, lo, hi, phi = signed_area_root(curve, t, region, branches)
        X = optimize.brentq(phi, lo, hi, xtol=1e-15, rtol=4 * _EPS, maxiter=200)
        s0 = invert_branch(curve, t, P, X)
        s1 = invert_branch(curve, t, N, X)
        polished = _newton_pair(curve, t, s0, s1, P, N, iters=2)
        if polished is not None:
            r_old = abs(curve.area(s0, t) - curve.area(s1, t))
            p0, p1 = polished
            if abs(curve.area(p0, t) - curve.area(p1, t)) <= r_old:
                s0, s1 = p0, p1
                X = curve.x(s0, t)
    n = crossing_count(branches, X)
    if n != 3:
        raise NotSCurve(f"vertical line x = {X} meets the curve {n} times at t = {t}")
    return _record(curve, t, s0, s1, X, region.area_scale)


def _view_from_cuts(curve: ParametricCurve, t: float, records: list, branches: list, method: str):
    records = sorted(records, key=lambda r: r.s0)
    fwd = [br for br in branches if br.forward]
    edges = [-math.inf] + [v for r in records for v in (r.s0, r.s1)] + [math.inf]
    arcs, arc_branches = [], []
    for a, b in zip(edges[0::2], edges[1::2]):
        arcs.append((a, b))
        probe = b if a == -math.inf else a
        br = next((f for f in fwd if f.s_a <= probe <= f.s_b), None)
        if br is None:
            raise ProjectionInconsistent(f"kept arc [{a}, {b}] is not on a forward branch at t = {t}")
        arc_branches.append(br)
    kept = [r for r in records if r.lax_ok]
    dropped = [r for r in records if not r.lax_ok]
    return WeakSolutionView(curve, t, kept, arcs, arc_branches, method, dropped)


def _consistent(records: list) -> bool:
    records = sorted(records, key=lambda r: r.s0)
    for a, b in zip(records[:-1], records[1:]):
        if not (a.s1 < b.s0 and a.X < b.X):
            return False
    return True


def _guess_for(region: OverturnRegion, guesses):
    if not guesses:
        return None
    for g in guesses:
        if max(g[0], region.s_lo) <= min(g[1], region.s_hi):
            return g
    return None


def project_weak_solution(curve: ParametricCurve, t: float, guesses: Optional[Sequence[tuple]] = None,
                          method: str = "auto") -> WeakSolutionView:
    """Replace every fold by an equal-area shock.

    ``method="auto"`` tries the S-curve root per fold and falls back to the
    envelope pairs when a fold is not S-shaped or the per-fold answers
    collide; ``"scurve"`` and ``"envelope"`` force one path.
    """
    branches = monotone_branches(curve, t)
    regions = fold_regions(curve, t, branches)
    if not regions:
        return _view_from_cuts(curve, t, [], branches, "identity")
    if method in ("auto", "scurve"):
        try:
            recs = [locate_shock(curve, t, r, _guess_for(r, guesses), branches) for r in regions]
            if not _consistent(recs):
                raise ProjectionInconsistent(f"per-fold shocks overlap at t = {t}")
            return _view_from_cuts(curve, t, recs, branches, "scurve")
        except (NotSCurve, NoRoot, ProjectionInconsistent):
            if method == "scurve":
                raise
    recs = []
    for s0, s1, X in equal_area_pairs(curve, t, branches):
        inside = [r for r in regions if s0 <= r.s_lo and r.s_hi <= s1]
        uL, uR = curve.point(s0, t)[1], curve.point(s1, t)[1]
        if inside:
            width = max(r.x_fold_right for r in inside) - min(r.x_fold_left for r in inside)
            scale = max(width * abs(uL - uR), _EPS)
        else:
            scale = max(abs(uL - uR), 1.0) * _EPS
        recs.append(_record(curve, t, s0, s1, X, scale))
    return _view_from_cuts(curve, t, recs, branches, "envelope")


def merge_on_collision(parents: Sequence[ShockRecord], child: ShockRecord, new_id: int) -> ShockRecord:
    """Relabel ``child`` as the merger of ``parents``."""
    ids = tuple(sorted(p.id for p in parents))
    return replace(child, id=new_id, parents=ids, provenance="merged(" + ";".join(map(str, ids)) + ")")


# }}}


# {{{ reinitialization

def _reinit(curve: ParametricCurve, t: float, view: WeakSolutionView, k_per_jump: int = 16):
    cuts = sorted(view.shocks + view.dropped, key=lambda r: r.s0)
    for a, b in zip(cuts[:-1], cuts[1:]):
        if not a.s1 < b.s0:
            raise ProjectionInconsistent(f"empty kept arc between shocks at t = {t}")
    edges = [-math.inf] + [v for r in cuts for v in (r.s0, r.s1)] + [math.inf]
    kept = list(zip(edges[0::2], edges[1::2]))
    segs, nodes, intervals = [], [], []
    s_new = 0.0
    for idx, (lo, hi) in enumerate(kept):
        lo_c, hi_c = max(lo, curve.s_first), min(hi, curve.s_last)
        for seg in curve.segments:
            a, b = max(seg.s_a, lo_c), min(seg.s_b, hi_c)
            if not b > a:
                continue
            segs.append(seg.restrict(a, b, s_new))
            inner = curve.node_s[(curve.node_s > a) & (curve.node_s < b)]
            nodes.extend([s_new, *(s_new + (inner - a)), s_new + (b - a)])
            s_new += b - a
        if idx < len(cuts):
            r = cuts[idx]
            if r.lax_ok:
                length = r.uL - r.uR
                segs.append(VerticalSegment(r.X, r.uL, r.uR, s_new, s_new + length, t))
                nodes.extend(np.linspace(s_new, s_new + length, max(k_per_jump, 2)))
                intervals.append((s_new, s_new + length))
                s_new += length
            else:
                intervals.append((s_new, s_new))
    if not segs:
        x, u = curve.point(0.5 * (curve.s_first + curve.s_last), t)
        return ParametricCurve([], [0.0], curve.flux, t, areas=[], anchor=(x, u, t)), intervals
    node_s = np.unique(np.asarray(nodes, dtype=float))
    return ParametricCurve(segs, node_s, curve.flux, t), intervals


def reinitialize(curve: ParametricCurve, t: float, view: WeakSolutionView, k_per_jump: int = 16) -> ParametricCurve:
    """Cut the swallowed arcs out and restart each shock as a fresh down-jump at time ``t``.

    Surviving arcs keep their own creation times, so the exact flow of
    everything that was not swallowed is untouched.
    """
    if view.t != t:
        raise ProjectionInconsistent(f"view is at t = {view.t}, not {t}")
    return _reinit(curve, t, view, k_per_jump)[0]


# }}}


# {{{ appendix pipeline

def _lobatto(a: float, b: float, m: int):
    k = np.arange(m)
    return a + (b - a) * 0.5 * (1.0 - np.cos(np.pi * k / (m - 1)))


def appendix_root_shock(uL_arc: Callable, uR_arc: Callable, shock_state: tuple, dt: float, order: int = 3,
                        *, flux: FluxModel):
    """Advance an isolated shock by ``dt`` from Hermite data alone.

    ``uL_arc`` and ``uR_arc`` map ``x`` to ``(u, du/dx)`` on the flowed
    left and right arcs.  The flowed shock line is the fan
    ``H(x) = F'^{-1}((x - x_prev) / dt)`` on ``[a1, b1]``.  The new position
    is the unique root in ``(a1, b1)`` of the degree ``order + 1``
    polynomial balancing the two lobes between the interpolants.
    """
    x_prev, uL, uR, t_prev = (float(v) for v in shock_state)
    if order < 3 or order % 2 == 0 or order + 1 > 10:
        raise ValueError(f"order must be odd in [3, 9], got {order}")
    if not dt > 0:
        raise ValueError("dt must be positive")
    a1 = x_prev + flux.dF(uR) * dt
    b1 = x_prev + flux.dF(uL) * dt
    if not a1 < b1:
        raise NoRootInBracket(f"empty bracket [{a1}, {b1}]")
    m = (order + 1) // 2
    xs = _lobatto(a1, b1, m)
    c = x_prev  # local coordinate keeps the monomials well scaled

    def data(fn):
        vals = [fn(float(x)) for x in xs]
        return [v[0] for v in vals], [v[1] for v in vals]

    def H(x):
        h = flux.invDF((x - x_prev) / dt)
        return float(h), float(1.0 / (dt * flux.d2F(h)))

    y1, d1 = data(uL_arc)
    y2, d2 = data(uR_arc)
    yh, dh = data(H)
    loc = xs - c
    P1 = hermite_interpolate(loc, y1, d1)
    P2 = hermite_interpolate(loc, y2, d2)
    PH = hermite_interpolate(loc, yh, dh)
    I1 = (PH - P2).integ()
    I2 = (P1 - PH).integ()
    la, lb = a1 - c, b1 - c
    Q = I1 + I2 - (I1(la) + I2(lb))
    roots = poly_roots_in_interval(Q, la, lb)
    if not roots:
        raise NoRootInBracket(f"no root of the shock polynomial in ({a1}, {b1})")
    if len(roots) > 1:
        raise MultipleRoots(f"{len(roots)} roots of the shock polynomial in ({a1}, {b1}): {[r + c for r in roots]}")
    X = roots[0] + c
    diagnostics = {"polynomial": Q, "shift": c, "residual": float(Q(roots[0])), "bracket": (a1, b1),
                   "interpolants": (P1, P2, PH)}
    return X, diagnostics


def _arc_function(curve: ParametricCurve, t: float, br: Branch, side: str):
    def f(x):
        s = invert_branch(curve, t, br, x)
        at_edge = s == (br.s_b if side == "left" else br.s_a)
        xs, du = curve.flow_velocity(s, t, side=side if at_edge else None, strict=False)
        return curve.point(s, t)[1], du / xs
    return f


def _appendix_view(curve: ParametricCurve, t: float, prev: list, t_prev: float, order: int):
    """View at ``t`` where folds grown from the previous shocks are solved by the polynomial route."""
    branches = monotone_branches(curve, t)
    regions = fold_regions(curve, t, branches)
    recs, diags = [], []
    for r in regions:
        src = next((p for p in prev if p[1] is not None and r.s_lo <= p[1][0] and p[1][1] <= r.s_hi), None)
        if src is None:
            recs.append(locate_shock(curve, t, r, branches=branches))
            continue
        rec_prev, (va, vb) = src[0], src[1]
        P, inner, N = neighbours(branches, r)
        if (r.s_lo, r.s_hi) != (va, vb):
            raise NotSCurve("fold grew past the restarted jump")
        X, d = appendix_root_shock(_arc_function(curve, t, P, "left"), _arc_function(curve, t, N, "right"),
                                   (rec_prev.X, rec_prev.uL, rec_prev.uR, t_prev), t - t_prev, order,
                                   flux=curve.flux)
        s0 = invert_branch(curve, t, P, X)
        s1 = invert_branch(curve, t, N, X)
        recs.append(_record(curve, t, s0, s1, X, r.area_scale))
        diags.append(d["residual"])
    if not _consistent(recs):
        raise ProjectionInconsistent(f"appendix shocks overlap at t = {t}")
    return _view_from_cuts(curve, t, recs, branches, "appendix"), diags


# }}}


# {{{ tracking

@dataclass
class TrackResult:
    times: list
    records: list          # per output time, list of ShockRecord
    collisions: list
    views: list
    curves: list           # curve each view was taken from
    diagnostics: list      # per output time dict

    def series(self) -> dict:
        out: dict = {}
        for recs in self.records:
            for r in recs:
                out.setdefault(r.id, []).append(r)
        return out


def _overlaps(a: tuple, b: tuple) -> bool:
    return max(a[0], b[0]) <= min(a[1], b[1])


def _refine_collision(curve, t_lo, t_hi, parent_intervals, tol, guesses):
    """Bisection on the first time one cut overlaps two parent intervals."""
    def merged(tt):
        view = project_weak_solution(curve, tt, guesses)
        for sh in view.shocks:
            if sum(_overlaps((sh.s0, sh.s1), iv) for iv in parent_intervals) >= 2:
                return view, sh
        return view, None

    best = None
    while t_hi - t_lo > tol * max(1.0, abs(t_hi)):
        tm = 0.5 * (t_lo + t_hi)
        if tm <= t_lo or tm >= t_hi:
            break
        view, sh = merged(tm)
        if sh is not None:
            t_hi, best = tm, sh
        else:
            t_lo = tm
    if best is None:
        best = merged(t_hi)[1]
    return t_hi, (best.X if best is not None else math.nan), (t_lo, t_hi)


def track_curve(curve: ParametricCurve, times: Sequence[float], mode: str = "flow",
                reinit: str = "after-collision", collision_tol: float = 1e-13, order: int = 3,
                k_per_jump: int = 16) -> TrackResult:
    """Shocks at every output time with identities threaded between times."""
    times = [float(t) for t in times]
    if not times:
        raise ValueError("no output times")
    if any(b <= a for a, b in zip(times[:-1], times[1:])):
        raise ValueError("output times must be strictly increasing")
    if mode not in ("flow", "appendix"):
        raise ValueError(f"unknown mode {mode!r}")
    if reinit not in ("never", "after-collision", "every-output"):
        raise ValueError(f"unknown reinit policy {reinit!r}")
    if mode == "appendix":
        reinit = "every-output"
    cur = curve
    prev: list = []        # (ShockRecord, (s0, s1) in cur's parametrization)
    next_id = 0
    out = TrackResult([], [], [], [], [], [])
    t_prev = None
    for t in times:
        try:
            diag = {"method": None, "appendix_fallback": False}
            guesses = [iv for _, iv in prev]
            view = None
            if mode == "appendix" and prev and t_prev is not None and t > t_prev:
                try:
                    view, res = _appendix_view(cur, t, [(r, iv) for r, iv in prev], t_prev, order)
                    diag["appendix_residuals"] = res
                except SolverError:
                    diag["appendix_fallback"] = True
            if view is None:
                view = project_weak_solution(cur, t, guesses)
            diag["method"] = view.method
            recs = []
            collided = False
            for sh in view.shocks:
                parents = [r for r, iv in prev if _overlaps((sh.s0, sh.s1), iv)]
                if not parents:
                    recs.append(replace(sh, id=next_id))
                    next_id += 1
                elif len(parents) == 1:
                    p = parents[0]
                    recs.append(replace(sh, id=p.id, provenance=p.provenance, parents=p.parents))
                else:
                    collided = True
                    t_star, x_star, bracket = _refine_collision(
                        cur, t_prev, t, [iv for r, iv in prev if r in parents], collision_tol, guesses)
                    child = merge_on_collision(parents, sh, next_id)
                    out.collisions.append(CollisionEvent(t_star, x_star, child.parents, next_id, bracket))
                    next_id += 1
                    recs.append(child)
            out.times.append(t)
            out.records.append(recs)
            out.views.append(view)
            out.curves.append(cur)
            out.diagnostics.append(diag)
            if reinit == "every-output" or (reinit == "after-collision" and collided):
                cur, intervals = _reinit(cur, t, view, k_per_jump)
                by_s = sorted(view.shocks + view.dropped, key=lambda r: r.s0)
                ids = {id(r): rec for r, rec in zip(view.shocks, recs)}
                prev = [(ids[id(r)], iv) for r, iv in zip(by_s, intervals) if id(r) in ids]
            else:
                prev = [(rec, (rec.s0, rec.s1)) for rec in recs]
            t_prev = t
        except SolverError as exc:
            exc.args = (f"at t = {t}: {exc.args[0] if exc.args else exc}",)
            raise
    return out


def track_shocks(scenario) -> TrackResult:
    """Run a :class:`~eqarea.scenario.Scenario` through :func:`track_curve`."""
    opts = scenario.options
    return track_curve(scenario.build_curve(), scenario.output_times, mode=opts.mode, reinit=opts.reinit,
                       order=opts.appendix_order, k_per_jump=opts.k_per_jump)

# }}}

"""Area and intersection computations on a flowed curve.

The curve at time ``t`` is split into monotone branches: forward (x_s > 0),
backward (x_s < 0) and standing (a down-jump at its own creation time,
x_s = 0).  Runs of non-forward branches are the folds.  Everything here
is a pure function of ``(curve, t)``.

Two equal-area formulations live side by side.  The signed area of a
vertical line through an S-shaped fold reduces, after integrating by
parts, to ``A(s0) - A(s1)`` with ``A`` the exact parametric area of the
curve module; the quadrature form of the same quantity is kept as an
independent check.  For folds that are not S-shaped the pairs come from
the lower envelope of ``(x(s), A(s))`` over the forward branches, which
is where the parametric area is smallest among all points stacked on one
vertical line.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import optimize
from scipy.interpolate import CubicHermiteSpline

from .curve import ParametricCurve
from .errors import NoRoot, NotSCurve, ProjectionInconsistent
from .interpolate import adaptive_quadrature

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class Branch:
    """Maximal parameter interval on which ``x(s, t)`` is monotone."""
    s_a: float
    s_b: float
    sign: int  # +1 forward, -1 backward, 0 standing down-jump
    x_a: float
    x_b: float

    @property
    def forward(self) -> bool:
        return self.sign > 0

    @property
    def x_lo(self) -> float:
        return min(self.x_a, self.x_b)

    @property
    def x_hi(self) -> float:
        return max(self.x_a, self.x_b)


@dataclass(frozen=True)
class OverturnRegion:
    s_lo: float
    s_hi: float
    x_fold_left: float
    x_fold_right: float
    u_lo: float = 0.0
    u_hi: float = 0.0
    standing: bool = False

    @property
    def area_scale(self) -> float:
        """Width times height of the fold; the natural unit for lobe areas."""
        w = (self.x_fold_right - self.x_fold_left) * abs(self.u_lo - self.u_hi)
        return max(w, _EPS * max(1.0, abs(self.u_lo), abs(self.u_hi)))


@dataclass(frozen=True)
class TripleIntersection:
    s0: float
    s_star: float
    s1: float
    X: float


# {{{ branch decomposition

def _smooth_sign_runs(curve: ParametricCurve, seg, t: float):
    """Sign runs of ``x_s`` on a smooth segment, with roots refined by Brent."""
    tau = t - seg.t_c
    d2F = curve.flux.d2F
    if tau == 0.0 or seg.piece.constant is not None:
        return [(seg.s_a, seg.s_b, 1)]

    def xs(s):
        x0 = seg.x0(s)
        return 1.0 + d2F(seg.piece.g(x0)) * seg.piece.dg(x0) * tau

    n_nodes = int(np.count_nonzero((curve.node_s >= seg.s_a) & (curve.node_s <= seg.s_b)))
    n = max(257, 4 * n_nodes + 1)
    ss = np.linspace(seg.s_a, seg.s_b, n)
    x0 = seg.x0(ss)
    vals = 1.0 + np.asarray(d2F(np.asarray(seg.piece.g(x0), dtype=float) * np.ones(n))) \
        * np.asarray(seg.piece.dg(x0), dtype=float) * tau
    cuts = []
    sg = np.sign(vals)
    for i in np.flatnonzero(sg[:-1] * sg[1:] < 0):
        cuts.append(optimize.brentq(xs, ss[i], ss[i + 1], xtol=1e-14, rtol=4 * _EPS))
    # a dip below zero that falls between two samples
    thr = 0.05 * max(1.0, float(np.max(np.abs(vals))))
    mid = vals[1:-1]
    interior = np.flatnonzero((mid <= vals[:-2]) & (mid <= vals[2:]) & (mid > 0) & (mid <= thr)) + 1
    for i in interior:
        res = optimize.minimize_scalar(xs, bounds=(ss[i - 1], ss[i + 1]), method="bounded",
                                       options={"xatol": 1e-14})
        if res.fun < 0:
            cuts.append(optimize.brentq(xs, ss[i - 1], res.x, xtol=1e-14, rtol=4 * _EPS))
            cuts.append(optimize.brentq(xs, res.x, ss[i + 1], xtol=1e-14, rtol=4 * _EPS))
    zero_at = [float(ss[i]) for i in np.flatnonzero(vals == 0.0)]
    cuts = sorted(set(cuts) | set(zero_at))
    edges = [seg.s_a] + [c for c in cuts if seg.s_a < c < seg.s_b] + [seg.s_b]
    runs = []
    for a, b in zip(edges[:-1], edges[1:]):
        if b <= a:
            continue
        v = xs(0.5 * (a + b))
        runs.append((a, b, 1 if v > 0 else (-1 if v < 0 else 0)))
    return runs


def monotone_branches(curve: ParametricCurve, t: float) -> list[Branch]:
    """Forward/backward/standing branches covering the whole real parameter line."""
    runs = [(-math.inf, curve.s_first, 1)]
    for seg in curve.segments:
        if seg.vertical:
            tau = t - seg.t_c
            if tau == 0.0:
                sign = 0 if seg.down else 1
            else:
                sign = 1 if seg.slope * tau > 0 else -1
            runs.append((seg.s_a, seg.s_b, sign))
        else:
            runs.extend(_smooth_sign_runs(curve, seg, t))
    runs.append((curve.s_last, math.inf, 1))
    merged = []
    for a, b, sg in runs:
        if merged and merged[-1][2] == sg:
            merged[-1] = (merged[-1][0], b, sg)
        elif b > a or math.isinf(a) or math.isinf(b):
            merged.append((a, b, sg))
    out = []
    for a, b, sg in merged:
        xa = -math.inf if a == -math.inf else curve.x(a, t)
        xb = math.inf if b == math.inf else curve.x(b, t)
        out.append(Branch(a, b, sg, xa, xb))
    return out


def fold_regions(curve: ParametricCurve, t: float, branches: Optional[list] = None) -> list[OverturnRegion]:
    """Runs of non-forward branches, standing down-jumps included."""
    branches = branches if branches is not None else monotone_branches(curve, t)
    regions = []
    i = 0
    while i < len(branches):
        if branches[i].forward:
            i += 1
            continue
        j = i
        while j + 1 < len(branches) and not branches[j + 1].forward:
            j += 1
        run = branches[i:j + 1]
        xs = [v for br in run for v in (br.x_a, br.x_b)]
        s_lo, s_hi = run[0].s_a, run[-1].s_b
        regions.append(OverturnRegion(
            s_lo, s_hi, min(xs), max(xs),
            u_lo=curve.point(s_lo, t)[1], u_hi=curve.point(s_hi, t)[1],
            standing=all(br.sign == 0 for br in run),
        ))
        i = j + 1
    return regions


def find_overturned_regions(curve: ParametricCurve, t: float) -> list[OverturnRegion]:
    """Maximal parameter intervals where ``x_s < 0``."""
    return [r for r in fold_regions(curve, t) if not r.standing]


def neighbours(branches: list, region: OverturnRegion):
    """Forward branch ending at ``s_lo``, the fold's branches, forward branch starting at ``s_hi``."""
    for i, br in enumerate(branches):
        if br.s_b == region.s_lo and br.forward:
            j = i + 1
            inner = []
            while j < len(branches) and not branches[j].forward:
                inner.append(branches[j])
                j += 1
            if j < len(branches) and branches[j].s_a == region.s_hi:
                return br, inner, branches[j]
    raise NotSCurve(f"no forward neighbours around s in [{region.s_lo}, {region.s_hi}]")


# }}}


# {{{ inversion

def invert_branch(curve: ParametricCurve, t: float, br: Branch, X: float) -> float:
    """Parameter ``s`` on a monotone branch with ``x(s, t) = X``."""
    if br.sign == 0:
        return br.s_a
    lo, hi = br.x_lo, br.x_hi
    if not lo <= X <= hi:
        raise NotSCurve(f"X = {X} outside branch range [{lo}, {hi}]")
    # straight tails
    if br.s_a == -math.inf:
        x_first = curve.x(curve.s_first, t)
        if X <= x_first:
            return curve.s_first + (X - x_first)
    if br.s_b == math.inf:
        x_last = curve.x(curve.s_last, t)
        if X >= x_last:
            return curve.s_last + (X - x_last)
    a = max(br.s_a, curve.s_first)
    b = min(br.s_b, curve.s_last)
    for seg in curve.segments:
        if seg.s_b <= a or seg.s_a >= b:
            continue
        sa, sb = max(seg.s_a, a), min(seg.s_b, b)
        xa, xb = curve.x(sa, t), curve.x(sb, t)
        if min(xa, xb) <= X <= max(xa, xb):
            return _invert_segment(curve, seg, t, X, sa, sb, xa, xb)
    raise NotSCurve(f"X = {X} not reached on branch [{br.s_a}, {br.s_b}]")


def _invert_segment(curve, seg, t, X, sa, sb, xa, xb) -> float:
    if X == xa:
        return sa
    if X == xb:
        return sb
    tau = t - seg.t_c
    flux = curve.flux
    if seg.vertical and tau != 0.0:
        u = flux.invDF((X - seg.x0_c) / tau)
        s = seg.s_a + (u - seg.u_a) / (seg.u_b - seg.u_a) * (seg.s_b - seg.s_a)
        return float(min(max(s, sa), sb))
    if not seg.vertical and seg.piece.constant is not None:
        s = seg.s_a + (X - flux.dF(seg.piece.constant) * tau - seg.x0_a)
        return float(min(max(s, sa), sb))
    f = lambda s: curve.x(s, t) - X
    s = optimize.brentq(f, sa, sb, xtol=1e-15, rtol=4 * _EPS, maxiter=200)
    xs = curve.x_s(s, t)
    if xs != 0.0:
        cand = s - f(s) / xs
        if sa <= cand <= sb and abs(f(cand)) < abs(f(s)):
            s = cand
    return float(s)


def crossing_count(branches: list, X: float) -> int:
    """Number of points at which the vertical line ``x = X`` meets the curve."""
    n = sum(1 for br in branches if br.sign != 0 and br.x_lo < X < br.x_hi)
    n += sum(1 for br in branches if br.sign == 0 and br.x_a == X)
    for a, b in zip(branches[:-1], branches[1:]):
        if a.x_b == X and a.sign != 0 and b.sign != 0:
            n += 1
    return n


# }}}


# {{{ S-curve quantities

def triple_intersection(curve: ParametricCurve, t: float, X: float, region: OverturnRegion,
                        branches: Optional[list] = None) -> TripleIntersection:
    """The three parameters at which ``x = X`` meets an S-shaped fold."""
    branches = branches if branches is not None else monotone_branches(curve, t)
    if not region.x_fold_left < X < region.x_fold_right:
        raise NotSCurve(f"X = {X} not strictly inside fold [{region.x_fold_left}, {region.x_fold_right}]")
    P, inner, N = neighbours(branches, region)
    if len(inner) != 1 or inner[0].sign >= 0:
        raise NotSCurve("fold is not a single backward branch")
    n = crossing_count(branches, X)
    if n != 3:
        raise NotSCurve(f"vertical line x = {X} meets the curve {n} times")
    s0 = invert_branch(curve, t, P, X)
    s_star = invert_branch(curve, t, inner[0], X)
    s1 = invert_branch(curve, t, N, X)
    return TripleIntersection(s0, s_star, s1, X)


def _breaks(curve: ParametricCurve, a: float, b: float):
    pts = [a] + [seg.s_a for seg in curve.segments if a < seg.s_a < b] + [b]
    if curve.segments and a < curve.s_last < b:
        pts.append(curve.s_last)
    return sorted(set(pts))


def signed_area_adif(curve: ParametricCurve, t: float, tri: TripleIntersection,
                     method: str = "quadrature", tol: float = 1e-12) -> float:
    """Lower-left lobe minus upper-right lobe about the line ``x = X``.

    ``method="quadrature"`` integrates ``(x u' - x_s u) / 2`` between the
    outer parameters; ``"exact"`` uses the parametric area ledger.
    """
    s0, s1 = tri.s0, tri.s1
    if s0 == s1:
        return 0.0
    x0, u0 = curve.point(s0, t)
    x1, u1 = curve.point(s1, t)
    xm, um = curve.point(tri.s_star, t)
    if method == "exact":
        return curve.area(s0, t) - curve.area(s1, t)
    if method != "quadrature":
        raise ValueError(f"unknown method {method!r}")

    def integrand(s):
        x, u = curve.evaluate(s, t)
        xs = curve.x_s_array(s, t)
        du = _du_array(curve, s)
        return 0.5 * (x * du - xs * u)

    pts = _breaks(curve, s0, s1)
    parts = [adaptive_quadrature(integrand, a, b, tol=tol / len(pts)) for a, b in zip(pts[:-1], pts[1:])]
    return math.fsum(parts) + 0.5 * (xm * (u0 - u1) + um * (x1 - x0))


def _du_array(curve: ParametricCurve, s):
    out = np.zeros_like(s)
    for k, seg in enumerate(curve.segments):
        hi_ok = (s < seg.s_b) if k + 1 < len(curve.segments) else (s <= seg.s_b)
        m = (s >= seg.s_a) & hi_ok
        if np.any(m):
            out[m] = seg.du(s[m])
    return out


def multivalued_area(curve: ParametricCurve, t: float, s_a: float, s_b: float,
                     method: str = "exact", tol: float = 1e-12) -> float:
    """``int_{s_a}^{s_b} u x_s ds`` at time ``t``."""
    if not s_a < s_b:
        raise ValueError("need s_a < s_b")
    if method == "exact":
        return curve.area(s_b, t) - curve.area(s_a, t)

    def integrand(s):
        _, u = curve.evaluate(s, t)
        return u * curve.x_s_array(s, t)

    pts = _breaks(curve, s_a, s_b)
    return math.fsum(adaptive_quadrature(integrand, a, b, tol=tol / len(pts)) for a, b in zip(pts[:-1], pts[1:]))


# }}}


# {{{ lower envelope

class _BranchTable:
    """Samples of ``(x, A, u)`` along a forward branch, for bracketing only."""

    def __init__(self, curve: ParametricCurve, t: float, br: Branch, n: int = 129):
        a, b = max(br.s_a, curve.s_first), min(br.s_b, curve.s_last)
        if b > a:
            inner = curve.node_s[(curve.node_s > a) & (curve.node_s < b)]
            ss = np.unique(np.concatenate([np.linspace(a, b, n), inner]))
        else:
            ss = np.array([a if math.isfinite(a) else b])
        xs, us = curve.evaluate(ss, t)
        As = np.array([curve.area(s, t) for s in ss])
        keep = np.concatenate([[True], np.diff(xs) > 0])
        self.x, self.A, self.u = xs[keep], As[keep], us[keep]
        self.spline = CubicHermiteSpline(self.x, self.A, self.u) if self.x.size > 1 else None

    def __call__(self, X):
        X = np.asarray(X, dtype=float)
        out = np.empty_like(X)
        lo = X < self.x[0]
        hi = X > self.x[-1]
        mid = ~(lo | hi)
        out[lo] = self.A[0] + self.u[0] * (X[lo] - self.x[0])
        out[hi] = self.A[-1] + self.u[-1] * (X[hi] - self.x[-1])
        if np.any(mid):
            out[mid] = self.spline(X[mid]) if self.spline is not None else self.A[0]
        return out


def _area_on(curve, t, br, X):
    s = invert_branch(curve, t, br, X)
    return curve.area(s, t), s


def _first_crossing(curve, t, bk, bj, tk, tj, lo, hi):
    """First abscissa in ``[lo, hi]`` at which branch ``bj`` drops to or below ``bk``."""
    def D(X):
        return _area_on(curve, t, bk, X)[0] - _area_on(curve, t, bj, X)[0]

    d_lo = D(lo)
    tol = 64 * _EPS * max(1.0, abs(_area_on(curve, t, bk, lo)[0]))
    if d_lo > tol:
        return lo
    if abs(d_lo) <= tol:
        uk = curve.point(invert_branch(curve, t, bk, lo), t)[1]
        uj = curve.point(invert_branch(curve, t, bj, lo), t)[1]
        if uk > uj:
            return lo
    if hi <= lo:
        return None
    grid = np.concatenate([tk.x, tj.x])
    grid = np.unique(np.concatenate([[lo, hi], grid[(grid > lo) & (grid < hi)]]))
    if grid.size < 64:
        grid = np.unique(np.concatenate([grid, np.linspace(lo, hi, 64)]))
    approx = tk(grid) - tj(grid)
    slack = 1e-8 * max(1.0, float(np.max(np.abs(tk(grid)))))
    prev_x, prev_d = lo, d_lo
    for i in np.flatnonzero(approx >= -slack):
        if i == 0:
            continue
        x = float(grid[i])
        d = D(x)
        if d >= 0:
            # step back to the last exact negative sample
            k = i - 1
            xl, dl = float(grid[k]), D(float(grid[k])) if k > 0 else d_lo
            while dl >= 0 and k > 0:
                k -= 1
                xl = float(grid[k])
                dl = D(xl) if k > 0 else d_lo
            if dl >= 0:
                return lo
            if d == 0.0:
                return x
            return optimize.brentq(D, xl, x, xtol=1e-15, rtol=4 * _EPS, maxiter=200)
        prev_x, prev_d = x, d
    return None


def equal_area_pairs(curve: ParametricCurve, t: float, branches: Optional[list] = None) -> list[tuple]:
    """Cut pairs ``(s0, s1, X)`` from the lower envelope of ``(x(s), A(s))``.

    Each pair satisfies ``x(s0) = x(s1) = X`` and ``A(s0) = A(s1)``, so
    the parametric area between the cut parameters is zero.
    """
    branches = branches if branches is not None else monotone_branches(curve, t)
    fwd = [br for br in branches if br.forward]
    if len(fwd) == len(branches):
        return []
    tables = [_BranchTable(curve, t, br) for br in fwd]
    pairs = []
    k, x_cur = 0, -math.inf
    while k < len(fwd) - 1:
        best = None
        bk = fwd[k]
        for j in range(k + 1, len(fwd)):
            bj = fwd[j]
            lo = max(x_cur, bk.x_lo, bj.x_lo)
            hi = min(bk.x_hi, bj.x_hi)
            if lo > hi:
                continue
            xc = _first_crossing(curve, t, bk, bj, tables[k], tables[j], lo, hi)
            if xc is None:
                continue
            uj = curve.point(invert_branch(curve, t, bj, xc), t)[1]
            if best is None or xc < best[0] - 1e-14 * max(1.0, abs(xc)) or \
                    (abs(xc - best[0]) <= 1e-14 * max(1.0, abs(xc)) and uj < best[2]):
                best = (xc, j, uj)
        if best is None:
            xe = bk.x_hi
            cands = [(_area_on(curve, t, fwd[j], xe)[0], j) for j in range(k + 1, len(fwd))
                     if fwd[j].x_lo <= xe <= fwd[j].x_hi]
            if not cands:
                raise ProjectionInconsistent(f"envelope breaks at x = {xe}, t = {t}")
            best = (xe, min(cands)[1], None)
        X, j = best[0], best[1]
        s0 = invert_branch(curve, t, bk, X)
        s1 = invert_branch(curve, t, fwd[j], X)
        pairs.append((s0, s1, X))
        k, x_cur = j, X
    for (a0, a1, xa), (b0, b1, xb) in zip(pairs[:-1], pairs[1:]):
        if not (a1 <= b0 and xa <= xb):
            raise ProjectionInconsistent(f"pairs overlap at t = {t}: {(a0, a1, xa)} vs {(b0, b1, xb)}")
    return pairs


# }}}


def signed_area_root(curve: ParametricCurve, t: float, region: OverturnRegion,
                     branches: Optional[list] = None):
    """Bracket of admissible X for an S-shaped region and the exact signed-area function."""
    branches = branches if branches is not None else monotone_branches(curve, t)
    P, inner, N = neighbours(branches, region)
    lo = max(region.x_fold_left, P.x_lo, N.x_lo)
    hi = min(region.x_fold_right, P.x_hi, N.x_hi)
    if not lo < hi:
        raise NotSCurve(f"fold [{region.x_fold_left}, {region.x_fold_right}] not covered by both outer branches")

    def phi(X):
        return curve.area(invert_branch(curve, t, P, X), t) - curve.area(invert_branch(curve, t, N, X), t)

    if phi(lo) > 0 or phi(hi) < 0:
        raise NoRoot(f"signed area keeps one sign on [{lo}, {hi}] at t = {t}")
    return P, inner, N, lo, hi, phi

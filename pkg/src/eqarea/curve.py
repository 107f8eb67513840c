"""The initial profile as a parametric curve, flowed exactly in time.

Each segment carries the time ``t_c`` at which its abscissa ``x0`` is
given; the characteristic flow ``x = x0 + F'(u) (t - t_c)`` then moves it
to any other time without stepping.  Segments of a reinitialized curve
keep the creation time of the curve they were cut from, so cutting never
perturbs the exact flow.

The parametric area ``A(s, t) = int u x_s ds`` is tracked exactly: the
part fixed at creation plus a term linear in time that only involves the
Legendre transform ``u F'(u) - F(u)`` of the endpoint states.
"""
from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import optimize

from .errors import JumpParameterError, OutOfRange
from .flux import FluxModel
from .profile import NodeSet, Piece, PiecewiseProfile, sample_nodes


@dataclass(frozen=True)
class SmoothSegment:
    """Graph of a profile piece: ``x0 = x0_a + (s - s_a)``, ``u = g(x0)``."""
    piece: Piece
    s_a: float
    s_b: float
    x0_a: float
    t_c: float = 0.0
    dx0: float = 1.0
    vertical: bool = False

    def x0(self, s):
        return self.x0_a + (s - self.s_a)

    def u(self, s):
        return self.piece.g(self.x0(s))

    def du(self, s):
        return self.piece.dg(self.x0(s))

    def base_area(self, s) -> float:
        """``int_{s_a}^{s} u x0' ds`` in the creation frame."""
        return self.piece.integrate(self.x0_a, float(self.x0(s)))

    def restrict(self, lo: float, hi: float, new_s_a: float) -> "SmoothSegment":
        return SmoothSegment(self.piece, new_s_a, new_s_a + (hi - lo), float(self.x0(lo)), self.t_c)


@dataclass(frozen=True)
class VerticalSegment:
    """Jump at ``x0`` traversed from ``u_a`` to ``u_b``; length ``|u_b - u_a|``."""
    x0_c: float
    u_a: float
    u_b: float
    s_a: float
    s_b: float
    t_c: float = 0.0
    dx0: float = 0.0
    vertical: bool = True

    @property
    def slope(self) -> float:
        return (self.u_b - self.u_a) / (self.s_b - self.s_a)

    @property
    def down(self) -> bool:
        return self.u_b < self.u_a

    def x0(self, s):
        return self.x0_c + 0.0 * s

    def u(self, s):
        w = (s - self.s_a) / (self.s_b - self.s_a)
        return self.u_a + (self.u_b - self.u_a) * w

    def du(self, s):
        return self.slope + 0.0 * s

    def base_area(self, s) -> float:
        return 0.0

    def restrict(self, lo: float, hi: float, new_s_a: float) -> "VerticalSegment":
        return VerticalSegment(self.x0_c, float(self.u(lo)), float(self.u(hi)), new_s_a,
                               new_s_a + (hi - lo), self.t_c)


class ParametricCurve:
    """Piecewise parametric curve ``(x(s, t), u(s))`` with an exact area ledger.

    ``node_s`` are the sample parameters (they include every segment
    boundary).  ``areas`` are the node-interval areas at ``t_created``.
    Outside ``[s_first, s_last]`` the curve continues as horizontal tails.
    """

    def __init__(self, segments: Sequence, node_s: Sequence[float], flux: FluxModel,
                 t_created: float = 0.0, areas: Optional[Sequence[float]] = None,
                 kinds: Optional[list] = None, anchor: Optional[tuple] = None):
        self.segments = list(segments)
        self.flux = flux
        self.t_created = float(t_created)
        self.node_s = np.asarray(node_s, dtype=float)
        self._starts = [seg.s_a for seg in self.segments]
        if self.segments:
            self.s_first = self.segments[0].s_a
            self.s_last = self.segments[-1].s_b
        else:
            # single point: (x0, u, t_c)
            self._anchor = anchor
            self.s_first = self.s_last = float(self.node_s[0])
        self.u_first = float(self.segments[0].u(self.s_first)) if self.segments else float(anchor[1])
        self.u_last = float(self.segments[-1].u(self.s_last)) if self.segments else float(anchor[1])
        # cumulative creation-time area at each segment start
        seg_areas = [self._seg_area(seg, seg.s_b, self.t_created) for seg in self.segments]
        self._cum = np.concatenate([[0.0], np.cumsum(seg_areas)])
        u_nodes = self.u_at(self.node_s)
        self.node_u = np.asarray(u_nodes, dtype=float) * np.ones_like(self.node_s)
        if areas is None:
            a_nodes = np.array([self.area(s, self.t_created) for s in self.node_s])
            areas = np.diff(a_nodes)
        self.areas = np.asarray(areas, dtype=float)
        self.kinds = kinds if kinds is not None else ["interior"] * self.node_s.size

    # {{{ construction

    @classmethod
    def from_profile(cls, profile: PiecewiseProfile, flux: FluxModel, n_per_piece: int = 64,
                     k_per_jump: int = 16) -> "ParametricCurve":
        nodes = sample_nodes(profile, n_per_piece, k_per_jump)
        return cls.from_nodes(nodes, profile, flux)

    @classmethod
    def from_nodes(cls, nodes: NodeSet, profile: PiecewiseProfile, flux: FluxModel) -> "ParametricCurve":
        segments = []
        i = 0
        n_int = len(nodes.sources)
        while i < n_int:
            src = nodes.sources[i]
            j = i
            while j + 1 < n_int and nodes.sources[j + 1] == src:
                j += 1
            s_a, s_b = float(nodes.s[i]), float(nodes.s[j + 1])
            kind, k = src
            if kind == "piece":
                segments.append(SmoothSegment(profile.pieces[k], s_a, s_b, float(nodes.x0[i])))
            else:
                jp = profile.jumps[k]
                segments.append(VerticalSegment(jp.x, jp.u_left, jp.u_right, s_a, s_b))
            i = j + 1
        anchor = None if segments else (float(nodes.x0[0]), float(nodes.u[0]), 0.0)
        curve = cls(segments, nodes.s, flux, 0.0, areas=nodes.areas, kinds=list(nodes.kind), anchor=anchor)
        curve.nodes = nodes
        return curve

    # }}}

    # {{{ pointwise evaluation

    def _seg(self, s: float) -> int:
        if s < self.s_first:
            return -1
        if s > self.s_last or not self.segments:
            return len(self.segments)
        k = bisect.bisect_right(self._starts, s) - 1
        return min(k, len(self.segments) - 1)

    def _head(self, t: float):
        """Flowed position of the first and last node."""
        if not self.segments:
            x0, u, tc = self._anchor
            x = x0 + self.flux.dF(u) * (t - tc)
            return x, x
        a, b = self.segments[0], self.segments[-1]
        xa = a.x0(a.s_a) + self.flux.dF(self.u_first) * (t - a.t_c)
        xb = b.x0(b.s_b) + self.flux.dF(self.u_last) * (t - b.t_c)
        return float(xa), float(xb)

    def point(self, s: float, t: float):
        """``(x, u)`` at parameter ``s`` (tails included) and time ``t``."""
        k = self._seg(s)
        if k < 0:
            return self._head(t)[0] + (s - self.s_first), self.u_first
        if k >= len(self.segments):
            return self._head(t)[1] + (s - self.s_last), self.u_last
        seg = self.segments[k]
        u = seg.u(s)
        return float(seg.x0(s) + self.flux.dF(u) * (t - seg.t_c)), float(u)

    def x(self, s: float, t: float) -> float:
        return self.point(s, t)[0]

    def u_at(self, s):
        if np.ndim(s):
            return np.array([self.point(float(si), self.t_created)[1] for si in np.ravel(s)])
        return self.point(s, self.t_created)[1]

    def x_s(self, s: float, t: float, side: Optional[str] = None) -> float:
        return self.flow_velocity(s, t, side=side, strict=False)[0]

    def flow_velocity(self, s: float, t: float, side: Optional[str] = None, strict: bool = True):
        """Velocity ``(x_s, u_s)`` of the flowed curve.

        At a boundary next to a jump segment the one-sided values differ;
        ``side`` selects one, otherwise :class:`JumpParameterError`.
        """
        k = self._seg(s)
        if (s == self.s_last and side == "right") or (s == self.s_first and side == "left"):
            return 1.0, 0.0
        if 0 <= k < len(self.segments) and self.segments[k].s_a == s and k > 0:
            left, right = self.segments[k - 1], self.segments[k]
            if side is None and strict and (left.vertical or right.vertical):
                raise JumpParameterError(f"s = {s} is a jump breakpoint; pass side='left' or 'right'")
            if side == "left":
                k -= 1
        elif 0 <= k < len(self.segments) and s == self.s_last and side is None and strict \
                and self.segments[k].vertical:
            raise JumpParameterError(f"s = {s} is a jump breakpoint; pass side='left' or 'right'")
        if k < 0 or k >= len(self.segments):
            return 1.0, 0.0
        seg = self.segments[k]
        u, du = seg.u(s), seg.du(s)
        return float(seg.dx0 + self.flux.d2F(u) * du * (t - seg.t_c)), float(du)

    def evaluate(self, s, t: float):
        """Vectorized ``(x, u)`` over an array of parameters."""
        s = np.asarray(s, dtype=float)
        x = np.empty_like(s)
        u = np.empty_like(s)
        xa, xb = self._head(t)
        m = s < self.s_first
        x[m], u[m] = xa + (s[m] - self.s_first), self.u_first
        m = s > self.s_last
        x[m], u[m] = xb + (s[m] - self.s_last), self.u_last
        if not self.segments:
            m = s == self.s_first
            x[m], u[m] = xa, self.u_first
        for k, seg in enumerate(self.segments):
            hi_ok = (s < seg.s_b) if k + 1 < len(self.segments) else (s <= seg.s_b)
            m = (s >= seg.s_a) & hi_ok
            if np.any(m):
                uu = np.asarray(seg.u(s[m]), dtype=float) * np.ones(int(m.sum()))
                x[m] = seg.x0(s[m]) + self.flux.dF(uu) * (t - seg.t_c)
                u[m] = uu
        return x, u

    def x_s_array(self, s, t: float):
        """Vectorized ``x_s`` (right-sided at segment boundaries)."""
        s = np.asarray(s, dtype=float)
        out = np.ones_like(s)
        for k, seg in enumerate(self.segments):
            hi_ok = (s < seg.s_b) if k + 1 < len(self.segments) else (s <= seg.s_b)
            m = (s >= seg.s_a) & hi_ok
            if np.any(m):
                uu = np.asarray(seg.u(s[m]), dtype=float) * np.ones(int(m.sum()))
                du = np.asarray(seg.du(s[m]), dtype=float) * np.ones(int(m.sum()))
                out[m] = seg.dx0 + self.flux.d2F(uu) * du * (t - seg.t_c)
        return out

    # }}}

    # {{{ areas

    def _seg_area(self, seg, s: float, t: float) -> float:
        leg = self.flux.legendre
        return seg.base_area(s) + (t - seg.t_c) * (leg(seg.u(s)) - leg(seg.u(seg.s_a)))

    def area(self, s: float, t: float) -> float:
        """Parametric area ``int_{s_first}^{s} u x_s ds`` at time ``t`` (tails included)."""
        k = self._seg(s)
        if k < 0:
            return self.u_first * (s - self.s_first)
        if k >= len(self.segments):
            end = self._cum[-1] + (t - self.t_created) * (
                self.flux.legendre(self.u_last) - self.flux.legendre(self.u_first))
            return float(end + self.u_last * (s - self.s_last))
        seg = self.segments[k]
        leg = self.flux.legendre
        a = self._cum[k] + self._seg_area(seg, s, self.t_created)
        return float(a + (t - self.t_created) * (leg(seg.u(s)) - leg(self.u_first)))

    def segment_area(self, i: int, t: float) -> float:
        """Exact area of node interval ``i`` at time ``t``."""
        leg = self.flux.legendre
        return float(self.areas[i] + (t - self.t_created) * (leg(self.node_u[i + 1]) - leg(self.node_u[i])))

    def total_area(self, t: float) -> float:
        if self.areas.size == 0:
            return 0.0
        leg = np.asarray(self.flux.legendre(self.node_u), dtype=float) * np.ones_like(self.node_u)
        return math.fsum(self.areas + (t - self.t_created) * np.diff(leg))

    def window_area(self, xa: float, xb: float, t: float) -> float:
        """``int u dx`` between two abscissae on the outer tails."""
        x_first, x_last = self._head(t)
        if not (xa <= x_first and xb >= x_last):
            raise OutOfRange(f"window [{xa}, {xb}] does not enclose [{x_first}, {x_last}] at t = {t}")
        sa = self.s_first + (xa - x_first)
        sb = self.s_last + (xb - x_last)
        return self.area(sb, t) - self.area(sa, t)

    # }}}

    def flow_position(self, i: int, t: float):
        """Node ``i`` moved by the characteristic flow to time ``t``."""
        return self.point(float(self.node_s[i]), t)

    def evaluate_curve(self, s: float, t: float):
        if not self.s_first <= s <= self.s_last:
            raise OutOfRange(f"s = {s} outside [{self.s_first}, {self.s_last}]")
        return self.point(s, t)

    def jacobian_det(self, s: float, t: float) -> float:
        """Determinant of the flow map's Jacobian in ``(x0, u)``; identically one."""
        u = self.point(s, t)[1]
        j11, j12 = 1.0, float(self.flux.d2F(u)) * (t - self.t_created)
        j21, j22 = 0.0, 1.0
        return j11 * j22 - j12 * j21

    def breaking_time(self, n_samples: int = 10_000) -> float:
        """First time some ``x_s`` reaches zero; creation time if a down-jump exists."""
        best = math.inf
        smooth = [seg for seg in self.segments if not seg.vertical]
        for seg in self.segments:
            if seg.vertical and seg.down:
                best = min(best, seg.t_c)
        total = sum(seg.s_b - seg.s_a for seg in smooth)
        d2F = self.flux.d2F
        for seg in smooth:
            n = max(16, int(n_samples * (seg.s_b - seg.s_a) / total)) if total > 0 else 16
            ss = np.linspace(seg.s_a, seg.s_b, n)
            rate = np.asarray(d2F(np.asarray(seg.u(ss), dtype=float) * np.ones(n)) * seg.du(ss)) * np.ones(n)
            i = int(np.argmin(rate))
            if rate[i] >= 0:
                continue
            lo, hi = ss[max(i - 1, 0)], ss[min(i + 1, n - 1)]
            res = optimize.minimize_scalar(lambda s: float(d2F(seg.u(s)) * seg.du(s)), bounds=(lo, hi),
                                           method="bounded", options={"xatol": 1e-12})
            r = min(float(rate[i]), float(res.fun)) if res.success else float(rate[i])
            best = min(best, seg.t_c - 1.0 / r)
        return best


def flow_position(flux: FluxModel, x0: float, u: float, t: float):
    """Characteristic flow of a single point from time 0."""
    return x0 + flux.dF(u) * t, u


def flow_velocity(flux: FluxModel, u: float, du: float, t: float):
    """Velocity ``(1 + F''(u) u' t, u')`` of a flowed graph point."""
    return 1.0 + flux.d2F(u) * du * t, du

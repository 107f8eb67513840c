"""Polynomial machinery: Hermite interpolation, root isolation, quadrature.

Polynomials are kept in the monomial basis (ascending coefficients) and
evaluated with a compensated Horner scheme; the shock polynomials built
from Hermite data are low degree, so stability matters more than speed.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import optimize

from .errors import CoincidentAbscissae, QuadratureError

MAX_DEGREE = 10


# {{{ error-free transformations

_SPLITTER = 134217729.0  # 2**27 + 1


def _two_sum(a, b):
    s = a + b
    z = s - a
    return s, (a - (s - z)) + (b - z)


def _split(a):
    c = _SPLITTER * a
    h = c - (c - a)
    return h, a - h


def _two_prod(a, b):
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    return p, al * bl - (((p - ah * bh) - al * bh) - ah * bl)

# }}}


class Polynomial:
    """Real polynomial ``sum(c[i] * x**i)``."""

    def __init__(self, coefficients: Sequence[float], max_degree: int = MAX_DEGREE):
        c = np.atleast_1d(np.asarray(coefficients, dtype=float)).copy()
        nz = np.flatnonzero(c)
        c = c[: nz[-1] + 1] if nz.size else np.zeros(1)
        if c.size - 1 > max_degree:
            raise ValueError(f"degree {c.size - 1} exceeds cap {max_degree}")
        self.coef = c
        self.max_degree = max_degree

    @property
    def degree(self) -> int:
        return self.coef.size - 1 if np.any(self.coef) else -1

    def __call__(self, x):
        c = self.coef
        s = c[-1] * np.ones_like(x, dtype=float) if np.ndim(x) else float(c[-1])
        r = 0.0 * s
        for ci in c[-2::-1]:
            p, pi = _two_prod(s, x)
            s, sigma = _two_sum(p, ci)
            r = r * x + (pi + sigma)
        return s + r

    def deriv(self) -> "Polynomial":
        if self.coef.size == 1:
            return Polynomial([0.0], self.max_degree)
        return Polynomial(self.coef[1:] * np.arange(1, self.coef.size), self.max_degree)

    def integ(self) -> "Polynomial":
        """Antiderivative vanishing at 0."""
        c = np.concatenate([[0.0], self.coef / np.arange(1, self.coef.size + 1)])
        return Polynomial(c, max(self.max_degree, c.size - 1))

    def integrate(self, a: float, b: float) -> float:
        P = self.integ()
        return float(P(b) - P(a))

    def _coerce(self, other):
        if isinstance(other, Polynomial):
            return other
        return Polynomial([float(other)], self.max_degree)

    def __add__(self, other):
        o = self._coerce(other)
        n = max(self.coef.size, o.coef.size)
        c = np.zeros(n)
        c[: self.coef.size] += self.coef
        c[: o.coef.size] += o.coef
        return Polynomial(c, max(self.max_degree, o.max_degree))

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(-self.coef, self.max_degree)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        o = self._coerce(other)
        cap = max(self.max_degree, o.max_degree)
        return Polynomial(np.convolve(self.coef, o.coef), cap)

    __rmul__ = __mul__

    def __repr__(self):
        return f"Polynomial({self.coef.tolist()})"


def hermite_interpolate(xs: Sequence[float], ys: Sequence[float], dys: Sequence[float]) -> Polynomial:
    """Polynomial of degree ``2m-1`` matching values and slopes at ``m`` nodes.

    Confluent divided differences in Newton form, then expanded to
    monomials.
    """
    xs = [float(x) for x in xs]
    m = len(xs)
    for i in range(m):
        for j in range(i + 1, m):
            if xs[i] == xs[j]:
                raise CoincidentAbscissae(f"repeated node {xs[i]}")
    z = [x for x in xs for _ in (0, 1)]
    n = len(z)
    q = [float(y) for y in ys for _ in (0, 1)]
    table = [q]
    prev = q
    for k in range(1, n):
        col = []
        for i in range(n - k):
            if k == 1 and i % 2 == 0:
                col.append(float(dys[i // 2]))
            else:
                col.append((prev[i + 1] - prev[i]) / (z[i + k] - z[i]))
        table.append(col)
        prev = col
    newton = [table[k][0] for k in range(n)]
    poly = Polynomial([newton[-1]], max_degree=max(MAX_DEGREE, n - 1))
    for k in range(n - 2, -1, -1):
        poly = poly * Polynomial([-z[k], 1.0], poly.max_degree) + newton[k]
    return poly


def hermite_cubic(x0, y0, m0, x1, y1, m1) -> Polynomial:
    """Unique cubic with the given endpoint values and slopes."""
    if x0 == x1:
        raise CoincidentAbscissae(f"x0 == x1 == {x0}")
    return hermite_interpolate([x0, x1], [y0, y1], [m0, m1])


@dataclass
class ParametricSegment:
    X: Polynomial
    U: Polynomial
    target_area: float
    area: float
    area_defect: float
    multivalued: bool


def parametric_hermite(p0, p1, v0, v1, target_area: float, magnitudes: str = "chord") -> ParametricSegment:
    """Cubic pair ``(X(s), U(s))`` on ``[0, 1]`` through ``p0 -> p1``.

    Tangent directions come from ``v0``, ``v1``.  With ``magnitudes="chord"``
    both tangents are rescaled to the chord length; ``"given"`` uses the
    vectors as parametric derivatives.  The parametric area is not enforced,
    only measured against ``target_area``.
    """
    p0 = np.asarray(p0, dtype=float)
    p1 = np.asarray(p1, dtype=float)
    v0 = np.asarray(v0, dtype=float)
    v1 = np.asarray(v1, dtype=float)
    chord = float(np.hypot(*(p1 - p0)))
    if chord == 0.0:
        X = Polynomial([p0[0]])
        U = Polynomial([p0[1]])
        return ParametricSegment(X, U, target_area, 0.0, abs(target_area), False)
    if magnitudes == "chord":
        t0 = v0 / np.hypot(*v0) * chord
        t1 = v1 / np.hypot(*v1) * chord
    elif magnitudes == "given":
        t0, t1 = v0, v1
    else:
        raise ValueError(f"unknown magnitude rule {magnitudes!r}")
    X = hermite_cubic(0.0, p0[0], t0[0], 1.0, p1[0], t1[0])
    U = hermite_cubic(0.0, p0[1], t0[1], 1.0, p1[1], t1[1])
    dX = X.deriv()
    area = (U * dX).integrate(0.0, 1.0)
    crit = [0.0, 1.0] + poly_roots_in_interval(dX.deriv(), 0.0, 1.0)
    multivalued = min(float(dX(c)) for c in crit) <= 0.0
    return ParametricSegment(X, U, target_area, area, abs(area - target_area), multivalued)


def poly_roots_in_interval(p: Polynomial, a: float, b: float, tol: float = 1e-13) -> list[float]:
    """All real roots of ``p`` in the open interval ``(a, b)``.

    Roots of the derivative split ``(a, b)`` into monotone pieces; each
    sign change is bracketed, solved with Brent, and Newton polished.
    Touching (double) roots are caught at the critical points.
    """
    if not a < b:
        raise ValueError("need a < b")
    deg = p.degree
    if deg <= 0:
        return []
    c = p.coef
    if deg == 1:
        r = -c[0] / c[1]
        return [float(r)] if a < r < b else []
    crit = poly_roots_in_interval(p.deriv(), a, b, tol)
    pts = [a] + crit + [b]
    scale = lambda x: float(np.sum(np.abs(c) * abs(x) ** np.arange(c.size)))
    roots: list[float] = []
    for x in crit:
        if abs(p(x)) <= 64 * np.finfo(float).eps * scale(x):
            roots.append(float(x))
    dp = p.deriv()
    for lo, hi in zip(pts[:-1], pts[1:]):
        flo, fhi = p(lo), p(hi)
        if flo == 0.0 or fhi == 0.0 or np.sign(flo) == np.sign(fhi):
            continue
        r = optimize.brentq(p, lo, hi, xtol=tol * 1e-3, rtol=4 * np.finfo(float).eps, maxiter=200)
        d = dp(r)
        if d != 0.0:
            cand = r - p(r) / d
            if lo < cand < hi and abs(p(cand)) <= abs(p(r)):
                r = cand
        roots.append(float(r))
    roots.sort()
    out: list[float] = []
    for r in roots:
        if a < r < b and (not out or r - out[-1] > tol):
            out.append(r)
    return out


# {{{ adaptive Gauss-Kronrod

_XGK = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327,
])
_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_WK = np.concatenate([_WGK[:-1], _WGK[::-1]])
# 7-point Gauss nodes are the odd-indexed Kronrod nodes
_WG15 = np.zeros(15)
_WG15[[1, 3, 5]] = _WG[:3]
_WG15[7] = _WG[3]
_WG15[[9, 11, 13]] = _WG[2::-1]


def _gk15(f, a, b):
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    fx = np.asarray(f(mid + half * _NODES), dtype=float)
    k = half * float(_WK @ fx)
    g = half * float(_WG15 @ fx)
    roundoff = 50 * np.finfo(float).eps * abs(half) * float(_WK @ np.abs(fx))
    return k, abs(k - g), roundoff


def adaptive_quadrature(f: Callable, a: float, b: float, tol: float = 1e-12, limit: int = 2000) -> float:
    """Globally adaptive 7/15-point Gauss-Kronrod quadrature.

    ``f`` must accept a numpy array.  Stops once the summed error estimate
    is below ``tol`` (absolute) or every remaining interval is already at
    its round-off floor; raises :class:`QuadratureError` after ``limit``
    subdivisions.
    """
    if a == b:
        return 0.0
    sign = 1.0
    if b < a:
        a, b, sign = b, a, -1.0
    val, err, floor = _gk15(f, a, b)
    # intervals whose estimate sits at round-off are parked, not split
    heap, done = [], []
    (heap if err > floor else done).append((-err, a, b, val))
    total_err = err if err > floor else 0.0
    n = 1
    while heap and total_err > tol:
        if n >= limit:
            raise QuadratureError(f"no convergence on [{a}, {b}]: error {total_err:.3e} > {tol:.1e}")
        e, lo, hi, v = heapq.heappop(heap)
        m = 0.5 * (lo + hi)
        if not lo < m < hi:
            raise QuadratureError(f"interval [{lo}, {hi}] cannot be split further")
        total_err += e
        for l2, h2 in ((lo, m), (m, hi)):
            v2, e2, f2 = _gk15(f, l2, h2)
            if e2 > f2:
                heapq.heappush(heap, (-e2, l2, h2, v2))
                total_err += e2
            else:
                done.append((-e2, l2, h2, v2))
        n += 1
    return sign * math.fsum(item[3] for item in heap + done)

# }}}

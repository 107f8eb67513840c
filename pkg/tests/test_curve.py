import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from eqarea.curve import ParametricCurve, flow_position, flow_velocity
from eqarea.errors import JumpParameterError, OutOfRange
from eqarea.flux import burgers, exponential, quadratic
from eqarea.shock import project_weak_solution, reinitialize

from conftest import ARCTAN, TRIANGLE, make_profile


def _curve(pieces, n=8, k=4, flux=None):
    return ParametricCurve.from_profile(make_profile(pieces), flux or burgers(), n, k)


@pytest.mark.parametrize("s,t", [(0.3, 2.0), (1.0, 0.5), (0.0, 7.0)])
def test_flow_position_on_ramp(B, s, t):
    assert flow_position(B, s, s, t) == (s + s * t, s)
    assert flow_position(B, 1.0, s, t) == (1 + s * t, s)


@pytest.mark.parametrize("f", [burgers(), quadratic(2, 1), exponential()], ids=lambda f: f.name)
def test_flow_position_identity_at_zero(f):
    assert flow_position(f, 0.4, -1.3, 0.0) == (0.4, -1.3)


def test_flow_velocity_examples(B):
    assert flow_velocity(B, 0.5, 1.0, 1.0) == (2.0, 1.0)
    assert flow_velocity(B, 0.5, 0.0, 123.0) == (1.0, 0.0)
    assert flow_velocity(B, 0.5, -1.0, 1.0) == (0.0, -1.0)


def test_curve_velocity_on_ramp_and_jump(triangle_curve):
    c = triangle_curve
    assert c.flow_velocity(0.5, 1.0) == (2.0, 1.0)
    with pytest.raises(JumpParameterError):
        c.flow_velocity(1.0, 1.0)
    assert c.flow_velocity(1.0, 1.0, side="left") == (2.0, 1.0)
    vx, vu = c.flow_velocity(1.0, 1.0, side="right")
    assert (vx, vu) == (-1.0, -1.0)


@pytest.mark.parametrize("t", [0.0, 0.5, 3.0, 10.0])
def test_segment_areas_triangle(t):
    c = _curve(TRIANGLE, 2, 2)
    assert c.segment_area(0, t) == pytest.approx(0.5 + t / 2, abs=1e-15)
    assert c.segment_area(0, t) == pytest.approx((1 + t) ** 2 / (2 * (1 + t)), abs=1e-15)
    assert c.segment_area(1, t) == pytest.approx(-t / 2, abs=1e-15)
    assert c.total_area(t) == pytest.approx(0.5, abs=1e-15)


def test_flat_interval_area_has_no_time_term():
    c = _curve([{"type": "constant", "value": 0, "domain": ["-inf", 0]},
                {"type": "constant", "value": 2, "domain": [0, 1]},
                {"type": "constant", "value": 2, "domain": [1, "inf"]}], 4, 2)
    i = int(np.flatnonzero(np.isclose(c.node_u[:-1], 2) & np.isclose(c.node_u[1:], 2))[0])
    assert c.segment_area(i, 0.0) == c.segment_area(i, 9.0)


def test_total_area_examples():
    zero = _curve([{"type": "constant", "value": 0, "domain": ["-inf", "inf"]}])
    assert zero.total_area(4.0) == 0.0
    steps = _curve([{"type": "constant", "value": 0, "domain": ["-inf", -1]},
                    {"type": "constant", "value": 3, "domain": [-1, 0]},
                    {"type": "constant", "value": 2, "domain": [0, 1]},
                    {"type": "constant", "value": 0, "domain": [1, "inf"]}], 4, 5)
    for t in (0.0, 0.3, 5.0):
        assert steps.total_area(t) == pytest.approx(3 * 1 + 2 * 1, abs=1e-14)


def test_breaking_times(arctan_curve, triangle_curve):
    assert triangle_curve.breaking_time() == 0.0
    assert arctan_curve.breaking_time() == pytest.approx(1.0, abs=1e-12)
    inc = _curve([{"type": "constant", "value": 0, "domain": ["-inf", 0]},
                  {"type": "linear", "coefficients": [0, 1], "domain": [0, 1]},
                  {"type": "constant", "value": 1, "domain": [1, "inf"]}])
    assert inc.breaking_time() == math.inf


@pytest.mark.parametrize("s,t", [(0.2, 0.0), (0.5, 1.0), (3.0, 1e6)])
def test_jacobian_is_one(triangle_curve, s, t):
    assert triangle_curve.jacobian_det(s, t) == 1.0


def test_evaluate_curve_examples(triangle_curve):
    assert triangle_curve.evaluate_curve(0.5, 1.0) == (1.0, 0.5)
    for i in range(triangle_curve.node_s.size):
        s = float(triangle_curve.node_s[i])
        assert triangle_curve.evaluate_curve(s, 2.0) == triangle_curve.flow_position(i, 2.0)
    with pytest.raises(OutOfRange):
        triangle_curve.evaluate_curve(triangle_curve.s_last + 1.0, 0.0)


def test_arctan_origin_point():
    c = _curve(ARCTAN, 65, 3)
    i = int(np.flatnonzero(c.nodes.x0 == 0.0)[0])
    assert c.evaluate_curve(float(c.node_s[i]), 0.5) == pytest.approx((0.5, 1.0), abs=1e-15)


def test_smooth_profile_velocity_never_vanishes(arctan_curve):
    rng = np.random.default_rng(3)
    seg = [g for g in arctan_curve.segments if not g.vertical][0]
    for s, t in zip(rng.uniform(seg.s_a, seg.s_b, 300), rng.uniform(0, 20, 300)):
        vx, vu = arctan_curve.flow_velocity(float(s), float(t))
        assert vx != 0.0 or vu != 0.0
        if vu == 0.0:
            assert vx == 1.0


@pytest.mark.parametrize("pieces", [TRIANGLE, ARCTAN], ids=["triangle", "arctan"])
def test_ledger_conservation_random_times(pieces):
    c = _curve(pieces, 32, 8)
    leg = c.flux.legendre
    a0 = c.total_area(0.0)
    scale = max(1.0, abs(a0))
    for t in np.random.default_rng(5).uniform(0, 100, 100):
        drift = c.total_area(t) - a0 - t * (leg(c.u_last) - leg(c.u_first))
        assert abs(drift) <= 1e-13 * scale * max(1.0, t)


def test_window_area_matches_integral(triangle_curve):
    for t in (0.0, 1.0, 4.0):
        assert triangle_curve.window_area(-5.0, 20.0, t) == pytest.approx(0.5, abs=1e-15)
    with pytest.raises(OutOfRange):
        triangle_curve.window_area(0.5, 20.0, 1.0)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.0, 0.6), st.floats(0.0, 0.35), st.floats(-9.0, 9.0))
def test_flow_is_a_semigroup(t1, t2, x):
    c = _curve(ARCTAN, 32, 4)
    view = project_weak_solution(c, t1)
    c1 = reinitialize(c, t1, view)
    direct = project_weak_solution(c, t1 + t2).evaluate(np.array([x]))
    rebased = project_weak_solution(c1, t1 + t2).evaluate(np.array([x]))
    assert rebased == pytest.approx(direct, abs=1e-14)

import math
import sys
from pathlib import Path

import pytest

from eqarea.curve import ParametricCurve
from eqarea.flux import burgers
from eqarea.profile import build_profile, piece_from_config

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"

TRIANGLE = [
    {"type": "constant", "value": 0, "domain": ["-inf", 0]},
    {"type": "linear", "coefficients": [0, 1], "domain": [0, 1]},
    {"type": "constant", "value": 0, "domain": [1, "inf"]},
]
TWO_STEP = [
    {"type": "constant", "value": 3, "domain": ["-inf", 0]},
    {"type": "constant", "value": 2, "domain": [0, 1]},
    {"type": "constant", "value": 0, "domain": [1, "inf"]},
]
ARCTAN = [
    {"type": "constant", "value": 0, "domain": ["-inf", -10]},
    {"type": "expression", "expression": "1 + arctan(-x)", "derivative": "-1/(1+x**2)",
     "antiderivative": "x - x*arctan(x) + 0.5*log(1+x**2)", "domain": [-10, 10]},
    {"type": "constant", "value": 0, "domain": [10, "inf"]},
]


def make_profile(pieces):
    return build_profile([piece_from_config(p) for p in pieces])


def riemann_pieces(uL, uR, x0=0.0):
    return [{"type": "constant", "value": uL, "domain": ["-inf", x0]},
            {"type": "constant", "value": uR, "domain": [x0, "inf"]}]


@pytest.fixture
def B():
    return burgers()


@pytest.fixture
def triangle_curve():
    return ParametricCurve.from_profile(make_profile(TRIANGLE), burgers(), 8, 4)


@pytest.fixture
def two_step_curve():
    return ParametricCurve.from_profile(make_profile(TWO_STEP), burgers())


@pytest.fixture(scope="session")
def arctan_curve():
    return ParametricCurve.from_profile(make_profile(ARCTAN), burgers())


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)


def riemann_ladder(uL, uR):
    """Dyadic Godunov ladder and domain for a Burgers Riemann rate check.

    Shock errors wobble with the sub-cell phase, so they get five levels.
    Fan errors behave like dx*log(1/dx) and only reach a rate of 0.8 once
    the fan spans about 512 cells, so the coarsest level starts there.
    """
    if uL > uR:
        return [256 * 2 ** k for k in range(5)], (-3.5, 3.5)
    dom = (min(0.0, uL) - 0.5, max(0.0, uR) + 0.5)
    nx0 = 2 ** math.ceil(math.log2(512 * (dom[1] - dom[0]) / (uR - uL)))
    return [nx0, 2 * nx0, 4 * nx0], dom

"""Weak solutions of convex scalar conservation laws by exact characteristic
flow of a parametric curve and equal-area shock extraction."""
from .curve import ParametricCurve
from .errors import (ConfigError, EqAreaError, NoOracle, SolverError)
from .flux import FluxModel, burgers, custom, exponential, flux_from_name, quadratic
from .profile import PiecewiseProfile, build_profile, sample_nodes
from .scenario import Options, Scenario, load_scenario, scenario_from_dict
from .shock import (ShockRecord, WeakSolutionView, appendix_root_shock, project_weak_solution,
                    track_curve, track_shocks)

__version__ = "0.1.0"

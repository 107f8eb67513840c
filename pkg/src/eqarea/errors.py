"""Exception hierarchy shared by every solver module."""


class EqAreaError(Exception):
    """Base class for all solver errors."""


class ConfigError(EqAreaError):
    """Malformed scenario or profile description."""


class SpecError(ConfigError):
    """Profile pieces overlap, leave gaps, or have inconsistent derivatives."""


class NonFiniteError(ConfigError):
    """A profile function returned a non-finite value."""


class SolverError(EqAreaError):
    """Numerical failure while evolving or projecting a curve."""


class DegenerateJump(SolverError):
    """Left and right states are indistinguishable."""


class BracketError(SolverError):
    """A root bracket does not contain the requested value."""


class QuadratureError(SolverError):
    """Adaptive quadrature hit its subdivision limit."""


class CoincidentAbscissae(SolverError):
    """Hermite interpolation nodes coincide."""


class JumpParameterError(SolverError):
    """Velocity requested exactly at a jump breakpoint without a side."""


class OutOfRange(SolverError):
    """Curve parameter outside the parametrized range."""


class NotSCurve(SolverError):
    """A vertical line does not cross an overturned region exactly three times."""


class NoRoot(SolverError):
    """The signed area has no sign change across the fold."""


class NoRootInBracket(SolverError):
    """The shock polynomial has no root in the flowed shock-line bracket."""


class MultipleRoots(SolverError):
    """The shock polynomial has more than one root in its bracket."""


class ProjectionInconsistent(SolverError):
    """Replacing folds by vertical lines did not give a single-valued function."""


class UnsupportedData(SolverError):
    """Oracle called on data outside its domain of validity."""


class CFLViolation(SolverError):
    """Courant number outside (0, 0.9]."""


class NoOracle(EqAreaError):
    """No exact solution is available for the scenario."""

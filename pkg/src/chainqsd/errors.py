"""Exception and warning types shared across the package."""


class ChainQsdError(Exception):
    """Base class for all package-specific errors."""


class FrameError(ChainQsdError):
    """A trajectory was supplied in the wrong reference frame."""


class ScenarioError(ChainQsdError):
    """A scenario or configuration failed validation."""


class SolverError(ChainQsdError):
    """A solver failed to produce a usable result."""


class ConvergenceError(SolverError):
    """Self-convergence gate failed: halving the step changed the answer."""


class HalfLifeNotFoundError(SolverError):
    """The population envelope never crossed half its initial value in the window."""


class CalibrationError(ChainQsdError):
    """Reservoir calibration could not bracket or reach the reference."""


class InvalidDensityError(ChainQsdError):
    """A matrix handed to a state-function routine was not positive semidefinite."""


class NumericalConsistencyError(ChainQsdError):
    """Two algebraically equal routes through a formula disagreed beyond tolerance."""


class PoleProximityWarning(UserWarning):
    """A Laplace-domain evaluation point sits nearly on a pole or branch point."""


class BranchCutWarning(UserWarning):
    """An incomplete-gamma argument sits within 1e-6 of the negative real axis."""


class ClampWarning(UserWarning):
    """A derived quantity violated its physical bounds by more than tolerance."""

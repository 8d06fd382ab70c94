"""Exception types shared across the library."""


class Si2dError(Exception):
    """Base class for all si2d-specific errors."""


class ChartDomainError(Si2dError, ValueError):
    """A coordinate lies outside the valid chart, cell, or grid range."""


class AdmissibilityError(Si2dError, ValueError):
    """Potential parameters violate the admissibility constraints."""


class NoBoundMotionError(Si2dError):
    """The requested level does not produce bound (librating) motion."""


class DegenerateMinimumError(Si2dError):
    """The effective potential has no genuine quadratic minimum."""


class SingularDenominatorError(Si2dError):
    """The combination V'' - V'/rho vanishes at the requested point."""


class InsufficientSpanError(Si2dError):
    """Trajectory is too short to extract the requested frequencies."""


class BranchOverlapError(Si2dError):
    """Branch assembly produced a non-single-valued angular potential."""


class SingularityAbortError(Si2dError):
    """Integration stopped because the orbit approached r = 0 or the chart wall."""

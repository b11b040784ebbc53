"""Exception hierarchy shared by all gapwell modules."""


class GapwellError(Exception):
    """Base class for every error raised by the package."""


class InvalidGeometry(GapwellError, ValueError):
    """Geometry data that violates a structural invariant."""


class OverlappingWindows(InvalidGeometry):
    def __init__(self, index, message=None):
        self.index = index
        super().__init__(message or f"window {index} overlaps or touches window {index - 1}")


class NonPositiveWidth(InvalidGeometry):
    def __init__(self, index, message=None):
        self.index = index
        super().__init__(message or f"item {index} has non-positive width")


class DomainError(GapwellError, ValueError):
    """Argument outside the domain of a special function."""


class OverflowSaturation(GapwellError, OverflowError):
    """Result exceeds the double precision range."""


class NonFinite(GapwellError, ValueError):
    """NaN or Inf entries in a matrix."""


class DegenerateAbscissa(GapwellError, ValueError):
    """All abscissae coincide; a line fit is undefined."""


class PoleGuard(GapwellError, ArithmeticError):
    """A trigonometric or Bessel ratio hit a pole at the requested energy."""


class NoBoundState(GapwellError):
    """The secular function has no root below the threshold."""


class BelowNumericalFloor(NoBoundState):
    """A bound state may exist but its gap is below the resolvable floor."""


class ConvergenceFailure(GapwellError, RuntimeError):
    """Truncation doubling reached the mode cap without meeting the tolerance."""


class IllConditioned(GapwellError, ArithmeticError):
    """The assembled system is numerically singular beyond recovery."""


class OutOfDomain(GapwellError, ValueError):
    """Evaluation point lies outside the waveguide."""


class SmallnessViolated(GapwellError, ValueError):
    """A smallness hypothesis of a closed-form bound fails."""


class BracketFailure(GapwellError, RuntimeError):
    """A line search could not bracket a minimum."""


class InsufficientRows(GapwellError, ValueError):
    """Too few usable rows for a fit."""


class Unsupported(GapwellError, NotImplementedError):
    """Requested configuration is outside the supported scope."""


class IterationFailure(GapwellError, RuntimeError):
    """An iterative eigensolver did not converge."""

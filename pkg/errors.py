"""
Exception types raised by the verification engine.

Every error is a ValueError so callers that only care about "bad input" can
catch that; the CLI catches TwistorError and turns it into a one-line
diagnostic with exit status 2.
"""


class TwistorError(ValueError):
    """Base class for every error raised by this package."""


class ZeroSpinor(TwistorError):
    """A primed spinor that must be nonzero was (numerically) zero."""


class DegenerateMetric(TwistorError):
    """The metric is singular or not positive definite at the requested point."""


class NotASDEinstein(TwistorError):
    """The base geometry fails the anti-self-dual Einstein precondition."""


class ZeroLambda(TwistorError):
    """The construction needs a nonzero scalar curvature."""


class NotNull(TwistorError):
    """A covector that must be null for the boundary metric is not."""


class BoundaryPoint(TwistorError):
    """The point is too close to the zero set of the defining function."""


class DegenerateDefiningFunction(TwistorError):
    """The defining function has a vanishing differential."""


class UnknownSuite(TwistorError):
    """A suite name is not in the verification registry."""


class UnknownGeometry(TwistorError):
    """A geometry name is not in the catalog."""


class InvalidConfig(TwistorError):
    """A run configuration value is missing, malformed or out of range."""


class IoFailure(TwistorError):
    """A report could not be written."""

"""Exception types shared across the package."""


class SpikeLabError(Exception):
    """Base class for all package errors."""


class NoZeroFound(SpikeLabError):
    """Shooting trajectory never crossed zero before the cutoff radius."""


class NonMonotone(SpikeLabError):
    """A profile that must decrease radially failed the monotonicity check."""


class OutOfRange(SpikeLabError):
    """Evaluation point outside the table domain."""


class MismatchedExponent(SpikeLabError):
    """Cached radial table built for a different exponent."""


class NonpositiveScale(SpikeLabError):
    """Rescaling factor must be positive."""


class QuadratureFailure(SpikeLabError):
    """Adaptive quadrature missed its error target."""


class NoRootInRange(SpikeLabError):
    """Bracketing of the matching-radius equation failed."""


class InvalidLevels(SpikeLabError):
    """Profile levels must satisfy b <= a with a strict jump."""


class ExponentOutOfRange(SpikeLabError):
    """Mass exponent below the integrability threshold."""


class NonConvergence(SpikeLabError):
    """Iteration exhausted its budget; diagnostics attached.

    Carried by raisers that cannot return a flagged value instead.
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class NegativeUndershoot(SpikeLabError):
    """An iterate dipped below zero beyond tolerance with damping exhausted."""


class ZeroPlasma(SpikeLabError):
    """The set {v > 1} is empty; constraint parameters are undefined."""


class OutOfDomain(SpikeLabError):
    """A ball or sample point leaves the computational domain."""


class InsufficientData(SpikeLabError):
    """Not enough sweep records to classify a spike sequence."""


class CoincidentPoints(SpikeLabError):
    """Green function requested on the diagonal."""


class ExteriorPoint(SpikeLabError):
    """Green function argument outside the open domain."""


class CollisionDetected(SpikeLabError):
    """Two configuration points approached below the safety distance."""


class ConfigError(SpikeLabError):
    """Invalid experiment configuration."""

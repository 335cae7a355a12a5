"""Exception and warning types shared across the package."""


class HqcalcError(Exception):
    """Base class for all package-specific failures."""


class DomainError(HqcalcError):
    """A scalar argument lies outside the domain of the operation."""


class OutOfDomain(HqcalcError):
    """Evaluation point lies outside the holomorphy sector of a function."""


class NonSymmetric(HqcalcError):
    """A matrix that must be symmetric is not."""


class SpectralPoint(HqcalcError):
    """Pencil is numerically singular: the point belongs to (or grazes) the spectrum."""


class Unsupported(HqcalcError):
    """Operation needs construction metadata the operator does not carry."""


class NotSectorial(HqcalcError):
    """Spectrum is not contained in the requested sector."""


class HypothesisViolation(HqcalcError):
    """A rational function fails one of the admissibility conditions.

    The ``condition`` attribute names which one: 'i' (degree gap), 'ii'
    (vanishing order at the origin), 'iii' (denominator zeros inside the
    closed sector).
    """

    def __init__(self, condition, message):
        super().__init__(message)
        self.condition = condition


class NotIntrinsic(HqcalcError):
    """Left factor of a product must be intrinsic (real stem components)."""


class StepTooLarge(HqcalcError):
    """Finite-difference step failed its extrapolation-based accuracy check."""


class UnreachableTolerance(HqcalcError):
    """Node budget exhausted before the quadrature error dropped below tolerance."""


class KernelSingular(HqcalcError):
    """A quadrature node hit a (near-)singular kernel."""


class NonFinite(HqcalcError):
    """A computation produced NaN or infinity."""


class ZeroInSector(HqcalcError):
    """Denominator polynomial has a zero inside the closed operator sector."""


class RegularizerSingular(HqcalcError):
    """Regularizer applied to the operator is numerically non-injective."""


class ProductNotDecaying(HqcalcError):
    """Regularized product fails the decay certificate needed by the calculus."""


class ConfigError(HqcalcError):
    """Invalid verification-suite configuration."""


class ConditioningWarning(UserWarning):
    """Numerically valid but poorly conditioned input."""

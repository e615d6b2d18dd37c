from __future__ import annotations


class CliffBundleError(Exception):
    """Base class for every error raised by the library."""


# clifford_core
class CapacityError(CliffBundleError, ValueError):
    pass


class SignatureMismatchError(CliffBundleError, ValueError):
    pass


class GradeError(CliffBundleError, ValueError):
    pass


class CliffordRelationError(CliffBundleError, ValueError):
    pass


class LinearDependenceError(CliffBundleError, ValueError):
    pass


# gamma_repr
class DeterminantError(CliffBundleError, ValueError):
    pass


class PlaneError(CliffBundleError, ValueError):
    pass


# geometry
class SingularMetricError(CliffBundleError, ValueError):
    pass


class SignatureError(CliffBundleError, ValueError):
    pass


class StepTooSmallError(CliffBundleError, ValueError):
    pass


class SampleCountError(CliffBundleError, ValueError):
    pass


class GhostDataError(CliffBundleError, ValueError):
    pass


# bundle
class SingularTrivializationError(CliffBundleError, ValueError):
    pass


class DegenerateStepError(CliffBundleError, ValueError):
    pass


# evolution
class NonHermitianError(CliffBundleError, ValueError):
    pass


class StabilityError(CliffBundleError, RuntimeError):
    def __init__(self, message: str, suggested_dt: float | None = None) -> None:
        super().__init__(message)
        self.suggested_dt = suggested_dt


class MassError(CliffBundleError, ValueError):
    pass


class BoundaryError(CliffBundleError, ValueError):
    pass


class DimensionMismatchError(CliffBundleError, ValueError):
    pass


# configuration
class ConfigError(CliffBundleError, ValueError):
    pass

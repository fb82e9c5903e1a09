"""Exception and warning types shared across the package."""


class InvalidModelError(ValueError):
    """A potential, perturbation or grid violates its preconditions."""


class NearSpectrumError(ArithmeticError):
    """A shifted solve hit a numerically singular pivot."""

    def __init__(self, z, message=None):
        self.z = z
        super().__init__(message or f"(H - z) numerically singular at z = {z!r}")


class SizeError(ValueError):
    """Dense eigensolve requested above the configured cap."""


class DegenerateEnergyError(ArithmeticError):
    """The two solutions used to build a scattering state are dependent."""


class SamplingError(ValueError):
    """Time sampling too coarse for the requested harmonics."""


class QualityWarning(UserWarning):
    """Base class for numerical-quality warnings (promoted to errors by ``--strict``)."""


class BoxContaminationWarning(QualityWarning):
    pass


class IllConditionedLimitWarning(QualityWarning):
    pass


class PerturbativeRegimeWarning(QualityWarning):
    pass


class FitQualityWarning(QualityWarning):
    pass


class ReflectionWarning(QualityWarning):
    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time

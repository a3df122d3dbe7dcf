"""Exception hierarchy shared by all ratvol modules."""


class RatvolError(Exception):
    """Base class for every error raised by ratvol."""


class KernelFailure(RatvolError):
    """A dense linear-algebra kernel did not converge."""

    def __init__(self, msg, shape=None):
        super().__init__(msg if shape is None else f"{msg} (matrix shape {shape})")
        self.shape = shape


class DegeneratePencilError(RatvolError):
    """The pencil lambda*E - N is singular."""


class SingularEquationError(RatvolError):
    """A Sylvester equation has overlapping spectra."""


class StabilityError(RatvolError):
    """A matrix required to be Hurwitz-stable is not."""


class DimensionError(RatvolError, ValueError):
    """Incompatible matrix or realization dimensions."""


class PoleEvaluationError(RatvolError):
    """Evaluation requested at (or numerically at) a pole."""


class ZeroFunctionError(RatvolError):
    """The rational function is numerically identically zero."""


class AxisPoleError(RatvolError):
    """A realization has eigenvalues on the imaginary axis."""


class FactorizationError(RatvolError):
    """Spectral factorization failed or is ill-conditioned."""


class InvalidSummandError(RatvolError):
    """A spectral summand violates its invariants (e.g. CM <= 0)."""


class MomentExistenceError(RatvolError):
    """The requested moment does not exist for this density."""


class ConfigError(RatvolError, ValueError):
    """Invalid model or run configuration."""


class EstimationError(RatvolError):
    """Method-of-moments estimation could not proceed."""


class StepFailure(RatvolError):
    """A filter step failed; carries the time index."""

    def __init__(self, t, cause):
        super().__init__(f"filter step t={t} failed: {cause}")
        self.t = t
        self.cause = cause

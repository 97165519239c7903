"""Exception types shared across the package."""


class BoundaryValueError(ValueError):
    """Memory parameter sits on the lattice d = 1/2 - 1/(2q) where the
    power-law machinery picks up logarithmic corrections."""


class LongMemoryError(ValueError):
    """The leading expansion rank q0 violates q0 < 1/(1 - 2d), so the
    transformed series is not long-range dependent."""


class SingularityError(ValueError):
    """Evaluation requested at the spectral singularity lambda = 0."""


class NonIntegrabilityError(RuntimeError):
    """Quadrature of the transform's second moment fails to stabilise
    across refinement levels."""


class ResolutionError(RuntimeError):
    """Grid-based Fourier inversion drifted beyond tolerance between two
    refinement levels."""


class QuadratureError(RuntimeError):
    """A limit-constant integral did not converge within tolerance."""


class ScaleTooCoarseError(ValueError):
    """Requested scale leaves fewer than one interior wavelet coefficient
    (or the filter would swallow the whole sample)."""


class DegenerateScalogramError(ValueError):
    """A scalogram value of exactly zero makes the log-regression undefined."""


class FilterValidationError(ValueError):
    """A filter bank failed one of its structural admissibility checks;
    the message names the violated assumption."""


class InvalidTargetError(ValueError):
    """A hypothesised memory parameter admits no valid (d*, K*) split."""


class ConfigError(ValueError):
    """Configuration rejected; the message carries the offending field path."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class PreconditionError(RuntimeError):
    """An asymptotic side condition exceeded the enforcement threshold the
    configuration opted into."""

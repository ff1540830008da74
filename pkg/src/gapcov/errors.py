"""Exception types raised by gapcov.

Every anticipated failure raises a named subclass of :class:`GapcovError`
so callers can distinguish e.g. a data-coverage problem from a numerical
one.  Validation errors also derive from ``ValueError``.
"""


class GapcovError(Exception):
    """Base class for all gapcov errors."""


class SeriesValidationError(GapcovError, ValueError):
    """A series violates a structural invariant (lengths, dt, weights)."""


class AllInvalidError(SeriesValidationError):
    """Every sample weight is zero; no moment or covariance is defined."""


class WindowError(GapcovError, ValueError):
    """A lag window is malformed or incompatible with the data."""


class SingularWindowError(WindowError):
    """The requested lag window makes the bias-mapping matrix singular.

    Raised before any inversion is attempted: correction requires
    ``-(N-1) < k1 <= k2 < N-1`` (auto) or the cross-series analogue.
    """


class PairCoverageError(GapcovError):
    """Some requested lag has no valid sample pairs (W_k = 0)."""

    def __init__(self, lags, message=None):
        self.lags = list(lags)
        if message is None:
            message = f"insufficient pair coverage at lags {self.lags}"
        super().__init__(message)


class FingerprintMismatchError(GapcovError):
    """An estimate and a mapping matrix come from different weight data."""


class SingularMatrixError(GapcovError):
    """The bias-mapping system is numerically singular.

    Carries the condition-number estimate that triggered the rejection.
    """

    def __init__(self, condition, threshold):
        self.condition = condition
        self.threshold = threshold
        super().__init__(
            f"mapping matrix is numerically singular: condition estimate "
            f"{condition:.3e} exceeds threshold {threshold:.3e}"
        )


class TruncationError(GapcovError):
    """A covariance window is narrower than the weights require.

    Treating out-of-window covariances as zero must be an explicit
    opt-in (``allow_truncation=True``).
    """


class SerializationError(GapcovError, ValueError):
    """Malformed serialized data (bad row, non-numeric token, ...)."""


class ConfigError(GapcovError, ValueError):
    """An experiment configuration or CLI argument is invalid."""

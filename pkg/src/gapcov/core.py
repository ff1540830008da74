"""Core domain types shared by every estimator module.

All types are immutable after construction (arrays are made read-only),
validate their invariants eagerly, and are safe to share across threads.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    AllInvalidError,
    SeriesValidationError,
    WindowError,
)

__all__ = [
    "GappySeries",
    "LagWindow",
    "CovarianceEstimate",
    "MappingMatrix",
    "SpectrumEstimate",
    "MomentSummary",
    "validate_series",
    "weight_fingerprint",
]


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.flags.writeable = False
    return a


def weight_fingerprint(*weight_arrays: np.ndarray, kind: str = "auto") -> str:
    """Digest tying weight sequences to products derived from them.

    A corrected estimate is only meaningful for the exact masking pattern
    it was built from; the digest makes a mismatch detectable.
    """
    h = hashlib.sha256()
    h.update(kind.encode())
    for w in weight_arrays:
        arr = np.ascontiguousarray(w, dtype=float)
        h.update(str(arr.shape[0]).encode())
        h.update(arr.tobytes())
    return h.hexdigest()


@dataclass(frozen=True, eq=False)
class GappySeries:
    """Equidistant samples plus per-sample validity weights.

    Parameters
    ----------
    values : array_like, shape (N,)
        Sample values; entries at zero-weight positions are arbitrary
        (they never influence any estimate) but must be finite.
    weights : array_like, shape (N,)
        Non-negative validity weights.  1/0 flags in the standard binary
        mode; general non-negative reals are accepted as well.
    dt : float
        Sampling interval (time units per sample), > 0.
    """

    values: np.ndarray
    weights: np.ndarray
    dt: float = 1.0

    def __post_init__(self):
        values = _readonly(self.values)
        weights = _readonly(self.weights)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "dt", float(self.dt))
        if values.ndim != 1 or weights.ndim != 1:
            raise SeriesValidationError("values and weights must be 1-D")
        if len(values) != len(weights):
            raise SeriesValidationError(
                f"length mismatch: {len(values)} values vs {len(weights)} weights"
            )
        if len(values) < 1:
            raise SeriesValidationError("series must contain at least one sample")
        if not np.isfinite(values).all():
            raise SeriesValidationError("non-finite sample value")
        if not np.isfinite(weights).all():
            raise SeriesValidationError("non-finite weight")
        if (weights < 0).any():
            raise SeriesValidationError("negative weight")
        if not (weights > 0).any():
            raise AllInvalidError("all weights are zero; series carries no valid data")
        if not self.dt > 0:
            raise SeriesValidationError(f"dt must be positive, got {self.dt}")

    def __len__(self) -> int:
        return len(self.values)

    @property
    def n(self) -> int:
        return len(self.values)

    @property
    def total_weight(self) -> float:
        """Sum of weights D (number of valid samples in binary mode)."""
        return float(self.weights.sum())

    @property
    def is_binary(self) -> bool:
        return bool(np.all((self.weights == 0.0) | (self.weights == 1.0)))

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.n) * self.dt

    def fingerprint(self) -> str:
        return weight_fingerprint(self.weights, kind="auto")


def validate_series(series: GappySeries, require_binary: bool = False) -> GappySeries:
    """Return ``series`` unchanged if all invariants hold.

    Construction already enforces the structural invariants; this re-runs
    them on an existing instance and optionally enforces binary weights.
    """
    GappySeries(series.values, series.weights, series.dt)
    if require_binary and not series.is_binary:
        raise SeriesValidationError("weights must be exactly 0 or 1 in binary mode")
    return series


@dataclass(frozen=True)
class LagWindow:
    """Contiguous integer lag range [k1, k2] for covariance estimation."""

    k1: int
    k2: int

    def __post_init__(self):
        object.__setattr__(self, "k1", int(self.k1))
        object.__setattr__(self, "k2", int(self.k2))
        if self.k1 > self.k2:
            raise WindowError(f"empty lag window: k1={self.k1} > k2={self.k2}")

    @classmethod
    def centered(cls, k: int) -> "LagWindow":
        """Window -floor(K/2) ... floor((K-1)/2) of K lags."""
        if k < 1:
            raise WindowError("window must contain at least one lag")
        return cls(-(k // 2), (k - 1) // 2)

    @classmethod
    def parse(cls, text: str) -> "LagWindow":
        """Parse 'K1:K2' (e.g. '-25:24')."""
        try:
            k1, k2 = text.split(":")
            return cls(int(k1), int(k2))
        except (ValueError, TypeError) as exc:
            raise WindowError(f"cannot parse lag window {text!r}; expected 'K1:K2'") from exc

    def __len__(self) -> int:
        return self.k2 - self.k1 + 1

    @property
    def size(self) -> int:
        return len(self)

    def lags(self) -> np.ndarray:
        return np.arange(self.k1, self.k2 + 1)

    @property
    def is_centered(self) -> bool:
        k = len(self)
        return self.k1 == -(k // 2) and self.k2 == (k - 1) // 2

    def check_correctable_auto(self, n: int) -> None:
        """Bounds under which the auto mapping matrix is invertible."""
        from .errors import SingularWindowError

        if not (-(n - 1) < self.k1 and self.k2 < n - 1):
            raise SingularWindowError(
                f"window {self.k1}:{self.k2} covers the full lag range of an "
                f"{n}-sample record; the mapping matrix is singular there. "
                f"Correction requires -(N-1) < k1 and k2 < N-1."
            )

    def check_correctable_cross(self, nx: int, ny: int) -> None:
        from .errors import SingularWindowError

        if not (-(nx - 1) < self.k1 and self.k2 < ny - 1):
            raise SingularWindowError(
                f"window {self.k1}:{self.k2} covers the full lag range for "
                f"records of {nx} and {ny} samples; the mapping matrix is "
                f"singular there. Correction requires -(Nx-1) < k1 and k2 < Ny-1."
            )


@dataclass(frozen=True, eq=False)
class CovarianceEstimate:
    """Covariance values over a contiguous lag window with pair weights.

    ``pair_weights[k]`` is W_k, the weight sum of valid sample pairs at
    lag k; it is strictly positive for every stored lag.
    """

    lags: np.ndarray
    values: np.ndarray
    pair_weights: np.ndarray
    dt: float
    kind: str = "auto"
    corrected: bool = False
    source_fingerprint: str | None = None
    condition: float | None = None

    def __post_init__(self):
        lags = np.array(self.lags, dtype=int, copy=True)
        lags.flags.writeable = False
        object.__setattr__(self, "lags", lags)
        object.__setattr__(self, "values", _readonly(self.values))
        object.__setattr__(self, "pair_weights", _readonly(self.pair_weights))
        object.__setattr__(self, "dt", float(self.dt))
        if self.kind not in ("auto", "cross"):
            raise ValueError(f"kind must be 'auto' or 'cross', got {self.kind!r}")
        if not (len(lags) == len(self.values) == len(self.pair_weights)):
            raise ValueError("lags, values and pair_weights must have equal length")
        if len(lags) == 0:
            raise WindowError("covariance estimate must cover at least one lag")
        if not np.array_equal(np.diff(lags), np.ones(len(lags) - 1, dtype=int)):
            raise WindowError("lags must be strictly increasing, contiguous integers")
        if not (self.pair_weights > 0).all():
            bad = [int(k) for k, w in zip(lags, self.pair_weights) if not w > 0]
            raise ValueError(f"non-positive pair weight at lags {bad}")
        if not self.dt > 0:
            raise ValueError("dt must be positive")

    def __len__(self) -> int:
        return len(self.lags)

    @property
    def window(self) -> LagWindow:
        return LagWindow(int(self.lags[0]), int(self.lags[-1]))

    @property
    def lag_times(self) -> np.ndarray:
        return self.lags * self.dt

    def value_at(self, lag: int) -> float:
        w = self.window
        if not (w.k1 <= lag <= w.k2):
            raise WindowError(f"lag {lag} outside window {w.k1}:{w.k2}")
        return float(self.values[lag - w.k1])


@dataclass(frozen=True, eq=False)
class MappingMatrix:
    """K x K operator sending a true covariance on a lag window to the
    expectation of its estimate for one specific masking pattern."""

    entries: np.ndarray
    window: LagWindow
    weight_fingerprint: str
    kind: str = "auto"

    def __post_init__(self):
        entries = np.array(self.entries, dtype=float, copy=True)
        entries.flags.writeable = False
        object.__setattr__(self, "entries", entries)
        k = len(self.window)
        if entries.shape != (k, k):
            raise ValueError(
                f"matrix shape {entries.shape} does not match window size {k}"
            )
        if self.kind not in ("auto", "cross"):
            raise ValueError(f"kind must be 'auto' or 'cross', got {self.kind!r}")


@dataclass(frozen=True, eq=False)
class SpectrumEstimate:
    """Power spectral density on the frequency grid j/(K*dt).

    Frequencies ascend from -floor(K/2)/(K*dt) to floor((K-1)/2)/(K*dt);
    values are complex (imaginary parts vanish to numerical tolerance for
    auto spectra of symmetric covariance windows).
    """

    frequencies: np.ndarray
    values: np.ndarray
    kind: str = "auto"
    dt: float = 1.0
    source_window: LagWindow | None = None

    def __post_init__(self):
        f = _readonly(self.frequencies)
        v = np.array(self.values, dtype=complex, copy=True)
        v.flags.writeable = False
        object.__setattr__(self, "frequencies", f)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "dt", float(self.dt))
        if self.kind not in ("auto", "cross"):
            raise ValueError(f"kind must be 'auto' or 'cross', got {self.kind!r}")
        if len(f) != len(v):
            raise ValueError("frequencies and values must have equal length")
        if self.source_window is not None and len(self.source_window) != len(v):
            raise ValueError("spectrum length must equal source window size")

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class MomentSummary:
    """Weighted moments of one series, including the short-record correction.

    ``corrected_variance == raw_variance + mean_estimator_variance`` holds
    exactly by construction.
    """

    mean: float
    raw_variance: float
    mean_estimator_variance: float
    corrected_variance: float = field(default=None)  # type: ignore[assignment]
    total_weight: float = 0.0

    def __post_init__(self):
        if self.corrected_variance is None:
            object.__setattr__(
                self,
                "corrected_variance",
                self.raw_variance + self.mean_estimator_variance,
            )
        elif self.corrected_variance != self.raw_variance + self.mean_estimator_variance:
            raise ValueError(
                "corrected_variance must equal raw_variance + mean_estimator_variance"
            )

"""Stochastic signal pairs with analytically known covariance, plus the
gap models used in the Monte-Carlo experiments.

The signal model is a (possibly autoregressive) moving-average filter of
Gaussian white noise, scaled to a target variance and shifted to a
target mean.  A pure MA kernel gives a strictly finite correlation
length, which makes the lag-window assumption of the bias correction
exact; an AR part provides long-memory processes for robustness checks.
The paired signal is a delayed, mixed copy:

    y_i = mean + mix * (x_{i-delay} - mean) + sqrt(1 - mix^2) * v_i

with v an independent realization of the same process, so the
cross-covariance is exactly mix * gamma(k - delay), peaking at the
delay with value mix * variance.

Randomness comes from numpy's PCG64 generator; every realization and
every channel draws from an independent stream derived from
``SeedSequence(seed, spawn_key=(realization, channel))``, so batches
are order-independent and values and masks are seeded separately.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import GappySeries
from .errors import ConfigError

__all__ = ["ProcessSpec", "GapModelSpec", "ProcessTruth", "generate_pair", "apply_gaps"]

_PSI_TRUNCATION = 1e-16
_PSI_CAP = 1_000_000

INVALID_FILL_VALUE = -1.0


def stream_rng(seed: int, *key: int) -> np.random.Generator:
    """Independent PCG64 stream for (seed, key...)."""
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=key))


@dataclass(frozen=True)
class ProcessSpec:
    """Parameters of the generated stationary process pair."""

    ma_kernel: tuple = (1.0,)
    mean: float = 0.0
    target_variance: float = 1.0
    cross_delay: int = 0
    cross_mix: float = 0.0
    ar_coeffs: tuple = ()
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "ma_kernel", tuple(float(b) for b in self.ma_kernel))
        object.__setattr__(self, "ar_coeffs", tuple(float(a) for a in self.ar_coeffs))
        if len(self.ma_kernel) == 0:
            raise ConfigError("ma_kernel must be non-empty")
        # target_variance == 0 gives the degenerate constant signal.
        if not self.target_variance >= 0:
            raise ConfigError("target_variance must be non-negative")
        if not 0.0 <= self.cross_mix <= 1.0:
            raise ConfigError("cross_mix must be in [0, 1]")
        if self.cross_delay < 0:
            raise ConfigError("cross_delay must be non-negative")
        if self.ar_coeffs:
            # stationarity: roots of 1 - a_1 z - ... - a_p z^p outside unit circle
            poly = np.concatenate(([-c for c in self.ar_coeffs[::-1]], [1.0]))
            roots = np.roots(poly)
            if (np.abs(roots) <= 1.0 + 1e-12).any():
                raise ConfigError("ar_coeffs describe a non-stationary process")

    def impulse_response(self) -> np.ndarray:
        """MA(inf) weights of the filter, truncated at negligible tail."""
        b = np.asarray(self.ma_kernel)
        if not self.ar_coeffs:
            return b.copy()
        a = np.asarray(self.ar_coeffs)
        p, q = len(a), len(b)
        psi = []
        n = 0
        peak = 0.0
        while n < _PSI_CAP:
            val = b[n] if n < q else 0.0
            for m in range(1, min(p, n) + 1):
                val += a[m - 1] * psi[n - m]
            psi.append(val)
            peak = max(peak, abs(val))
            n += 1
            if n > q and peak > 0:
                tail = max(abs(v) for v in psi[-p:]) if n >= p else abs(val)
                if tail < _PSI_TRUNCATION * peak:
                    break
        else:
            raise ConfigError("impulse response does not decay; check ar_coeffs")
        return np.asarray(psi)

    @property
    def correlation_support(self) -> int:
        """Largest lag with nonzero autocovariance (exact for pure MA)."""
        return len(self.impulse_response()) - 1

    def truth(self) -> "ProcessTruth":
        return ProcessTruth(self)


@dataclass(frozen=True, eq=False)
class ProcessTruth:
    """Closed-form moments of the process pair described by a spec."""

    spec: ProcessSpec
    _psi: np.ndarray = field(init=False, repr=False)
    _scale: float = field(init=False, repr=False)

    def __post_init__(self):
        psi = self.spec.impulse_response()
        unit_var = float(np.dot(psi, psi))
        object.__setattr__(self, "_psi", psi)
        object.__setattr__(self, "_scale", np.sqrt(self.spec.target_variance / unit_var))

    @property
    def mean(self) -> float:
        return self.spec.mean

    @property
    def variance(self) -> float:
        return self.spec.target_variance

    def autocovariance(self, lags) -> np.ndarray:
        """gamma_k = scale^2 * sum_m psi_m psi_{m+|k|}; holds for x and y."""
        lags = np.atleast_1d(np.asarray(lags, dtype=int))
        psi = self._psi * self._scale
        out = np.zeros(len(lags))
        for i, k in enumerate(lags):
            k = abs(int(k))
            if k < len(psi):
                out[i] = np.dot(psi[: len(psi) - k], psi[k:])
        return out

    def crosscovariance(self, lags) -> np.ndarray:
        """gamma_xy,k = mix * gamma(k - delay)."""
        lags = np.atleast_1d(np.asarray(lags, dtype=int))
        return self.spec.cross_mix * self.autocovariance(lags - self.spec.cross_delay)


def _filtered_noise(rng: np.random.Generator, psi: np.ndarray, n: int) -> np.ndarray:
    e = rng.standard_normal(n + len(psi) - 1)
    return np.convolve(e, psi, mode="valid")


def generate_pair(
    spec: ProcessSpec, n: int, realization: int = 0, dt: float = 1.0
) -> tuple[GappySeries, GappySeries, ProcessTruth]:
    """Generate one gap-free realization of the signal pair.

    ``realization`` selects an independent, reproducible noise stream;
    identical (spec, n, realization) always yield bit-identical output.
    """
    if n <= len(spec.ma_kernel) + spec.cross_delay:
        raise ConfigError(
            f"n={n} too small for kernel length {len(spec.ma_kernel)} "
            f"and cross delay {spec.cross_delay}"
        )
    truth = spec.truth()
    psi = truth._psi * truth._scale
    d = spec.cross_delay
    base = _filtered_noise(stream_rng(spec.seed, realization, 0), psi, n + d)
    x = spec.mean + base[d:]
    indep = _filtered_noise(stream_rng(spec.seed, realization, 1), psi, n)
    y = spec.mean + spec.cross_mix * base[:n] + np.sqrt(1.0 - spec.cross_mix**2) * indep
    ones = np.ones(n)
    return GappySeries(x, ones, dt), GappySeries(y, ones, dt), truth


@dataclass(frozen=True)
class GapModelSpec:
    """How validity weights are drawn.

    bernoulli: each sample valid independently with ``valid_probability``.
    markov: two-state chain started in its stationary 50/50 mix whose
        state flips with ``switch_probability`` per step; run lengths are
        geometric with mean 1/switch_probability.
    static_mask: the given weights, verbatim.
    """

    kind: str = "bernoulli"
    valid_probability: float = 1.0
    switch_probability: float = 0.1
    mask: tuple = ()
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("bernoulli", "markov", "static_mask"):
            raise ConfigError(f"unknown gap model kind {self.kind!r}")
        if not 0.0 <= self.valid_probability <= 1.0:
            raise ConfigError("valid_probability must be in [0, 1]")
        if not 0.0 <= self.switch_probability <= 1.0:
            raise ConfigError("switch_probability must be in [0, 1]")
        object.__setattr__(self, "mask", tuple(float(m) for m in self.mask))
        if self.kind == "static_mask" and len(self.mask) == 0:
            raise ConfigError("static_mask model requires a mask")

    def stationary_valid_fraction(self) -> float:
        if self.kind == "bernoulli":
            return self.valid_probability
        if self.kind == "markov":
            return 0.5
        m = np.asarray(self.mask)
        return float((m > 0).mean())


def draw_weights(model: GapModelSpec, n: int, realization: int = 0, channel: int = 0) -> np.ndarray:
    """Draw a validity-weight sequence of length n from the gap model."""
    if model.kind == "static_mask":
        if len(model.mask) != n:
            raise ConfigError(f"static mask length {len(model.mask)} != series length {n}")
        return np.asarray(model.mask, dtype=float)
    rng = stream_rng(model.seed, realization, channel)
    if model.kind == "bernoulli":
        return (rng.random(n) < model.valid_probability).astype(float)
    start = rng.random() < 0.5
    flips = rng.random(n - 1) < model.switch_probability
    states = np.empty(n, dtype=bool)
    states[0] = start
    states[1:] = start ^ (np.cumsum(flips) % 2).astype(bool)
    return states.astype(float)


def apply_gaps(
    series: GappySeries, model: GapModelSpec, realization: int = 0, channel: int = 0
) -> GappySeries:
    """Mask a gap-free series according to the gap model.

    Invalidated samples get the fill value -1 so that any estimator
    leakage of invalid values is detectable rather than silent.
    """
    w = draw_weights(model, series.n, realization, channel)
    values = np.where(w > 0, series.values, INVALID_FILL_VALUE)
    return GappySeries(values, w, series.dt)

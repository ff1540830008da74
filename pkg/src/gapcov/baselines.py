"""Comparison estimators: Lomb-Scargle periodogram and sample-and-hold.

Both are known-biased references for gappy data.  The Lomb-Scargle
periodogram is the classical time-shifted, mean-subtracted form over the
valid samples, scaled to power-spectral-density units such that on
gap-free data it equals dt*|DFT(z - zbar)|^2 / N at matching
frequencies.  For independently missing samples its bias is a constant
spectral offset that can be estimated and subtracted; for correlated
gaps a frequency-dependent error remains.  Sample-and-hold replaces each
invalid sample with the most recent valid value (leading gaps are
backfilled), which low-pass filters the signal.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import CovarianceEstimate, GappySeries, LagWindow, SpectrumEstimate
from .covariance import autocovariance_fft
from .errors import ConfigError, SeriesValidationError
from .moments import weighted_mean
from .spectrum import covariance_to_spectrum, spectrum_frequencies, spectrum_to_covariance

__all__ = [
    "LombScargleSpectrum",
    "lomb_scargle",
    "lomb_scargle_offset_correct",
    "lomb_scargle_offset",
    "sample_and_hold",
    "interpolated_covariance_spectrum",
    "lomb_scargle_on_window_grid",
]


@dataclass(frozen=True, eq=False)
class LombScargleSpectrum:
    """Lomb-Scargle estimate in power-spectral-density units."""

    frequencies: np.ndarray
    values: np.ndarray
    offset_corrected: bool = False
    alpha_prime: float | None = None

    def __post_init__(self):
        f = np.array(self.frequencies, dtype=float, copy=True)
        v = np.array(self.values, dtype=float, copy=True)
        f.flags.writeable = False
        v.flags.writeable = False
        object.__setattr__(self, "frequencies", f)
        object.__setattr__(self, "values", v)
        if len(f) != len(v):
            raise ValueError("frequencies and values must have equal length")

    def __len__(self) -> int:
        return len(self.values)


def _scargle_power(t: np.ndarray, c: np.ndarray, freqs: np.ndarray, dt: float) -> np.ndarray:
    """Classical time-shifted periodogram of mean-free samples c at times t."""
    nv = len(t)
    p = np.empty(len(freqs))
    frac = np.mod(freqs * dt, 1.0)
    for i, f in enumerate(freqs):
        if np.isclose(frac[i], 0.5):
            # Exact Nyquist (and odd multiples): the sine basis degenerates;
            # the limit of the general form is the alternating-sum power.
            signs = np.cos(np.pi * t / dt)
            p[i] = np.dot(c, signs) ** 2 / nv
            continue
        omega = 2.0 * np.pi * f
        tau = np.arctan2(np.sum(np.sin(2 * omega * t)), np.sum(np.cos(2 * omega * t))) / (
            2 * omega
        )
        theta = omega * (t - tau)
        ct = np.cos(theta)
        st = np.sin(theta)
        p[i] = 0.5 * (np.dot(c, ct) ** 2 / np.dot(ct, ct) + np.dot(c, st) ** 2 / np.dot(st, st))
    return p


def lomb_scargle(series: GappySeries, frequencies) -> LombScargleSpectrum:
    """Lomb-Scargle periodogram of the valid samples, in PSD units.

    Frequencies must be positive and must not alias to frequency zero
    (f * dt integer).  Requires at least two valid samples.
    """
    freqs = np.atleast_1d(np.asarray(frequencies, dtype=float))
    valid = series.weights > 0
    nv = int(valid.sum())
    if nv < 2:
        raise SeriesValidationError("Lomb-Scargle needs at least 2 valid samples")
    if (freqs <= 0).any():
        raise ConfigError("zero or negative frequency requested")
    if np.isclose(np.mod(freqs * series.dt, 1.0), 0.0).any():
        raise ConfigError("frequency aliases to zero (f * dt is an integer)")
    t = series.times[valid]
    c = series.values[valid] - weighted_mean(series)
    p = _scargle_power(t, c, freqs, series.dt)
    scale = series.dt * series.n / nv
    return LombScargleSpectrum(freqs, scale * p)


def lomb_scargle_offset(series: GappySeries, alpha_prime: float) -> float:
    """Constant spectral offset (dt/D)(1/alpha' - 1) sum w_i (z_i - zbar)^2."""
    d = series.total_weight
    dev = series.values - weighted_mean(series)
    return float(
        (series.dt / d) * (1.0 / alpha_prime - 1.0) * np.dot(series.weights, dev * dev)
    )


def lomb_scargle_offset_correct(
    spec: LombScargleSpectrum, series: GappySeries, alpha_prime: float | None = None
) -> LombScargleSpectrum:
    """Subtract the constant offset caused by independently missing samples.

    ``alpha_prime`` is the probability of a sample being valid; when not
    given it is estimated as D/N.  Only appropriate for randomly and
    independently missing samples.
    """
    if spec.offset_corrected:
        raise ValueError("spectrum is already offset-corrected")
    if alpha_prime is None:
        alpha_prime = series.total_weight / series.n
    if not 0.0 < alpha_prime <= 1.0:
        raise ConfigError(f"alpha_prime must be in (0, 1], got {alpha_prime}")
    off = lomb_scargle_offset(series, alpha_prime)
    return LombScargleSpectrum(
        spec.frequencies, spec.values - off, offset_corrected=True, alpha_prime=alpha_prime
    )


def sample_and_hold(series: GappySeries) -> GappySeries:
    """Replace invalid samples with the most recent valid value.

    Leading invalid samples are backfilled with the first valid value.
    Returns a fully valid series.
    """
    valid = series.weights > 0
    idx = np.where(valid, np.arange(series.n), -1)
    idx = np.maximum.accumulate(idx)
    idx[idx < 0] = np.flatnonzero(valid)[0]
    return GappySeries(series.values[idx], np.ones(series.n), series.dt)


def interpolated_covariance_spectrum(
    series: GappySeries, window: LagWindow
) -> tuple[CovarianceEstimate, SpectrumEstimate]:
    """Sample-and-hold baseline pipeline: interpolate, then treat the
    filled series as fully valid."""
    filled = sample_and_hold(series)
    cov = autocovariance_fft(filled, window)
    return cov, covariance_to_spectrum(cov)


def lomb_scargle_on_window_grid(
    series: GappySeries,
    window: LagWindow,
    alpha_prime: float | None = None,
    correct_offset: bool = False,
) -> tuple[CovarianceEstimate, SpectrumEstimate]:
    """Lomb-Scargle sampled on the lag-window frequency grid, plus the
    lag-domain curve obtained by inverse transform.

    The grid j/(K dt) contains frequency zero and (for even K) the
    Nyquist bin.  Lomb-Scargle is undefined at f = 0; since the
    estimator is mean-subtracted, the zero-frequency bin is set to 0 and
    negative frequencies use the even symmetry of the periodogram.  The
    lag-domain curve is the inverse transform of that grid; this
    interpretation is a documented choice, not part of the classical
    method.
    """
    k = len(window)
    if not window.is_centered:
        raise ConfigError("Lomb-Scargle grid sampling requires a centered window")
    freqs = spectrum_frequencies(k, series.dt)
    j = np.arange(-(k // 2), (k - 1) // 2 + 1)
    # Evaluate at |j| = 1 ... K//2 (the grid is even in frequency) and
    # mirror; for even K the -K/2 bin maps to |j| = K/2, the Nyquist bin.
    abs_grid = np.arange(1, k // 2 + 1) / (k * series.dt)
    ls = lomb_scargle(series, abs_grid)
    if correct_offset:
        ls = lomb_scargle_offset_correct(ls, series, alpha_prime)
    # f = 0: the mean-subtracted estimator carries no DC power; the
    # correction still shifts this bin like every other one.
    zero_bin = -lomb_scargle_offset(series, ls.alpha_prime) if correct_offset else 0.0
    by_abs_j = np.concatenate(([zero_bin], ls.values))
    values = by_abs_j[np.abs(j)]
    spec = SpectrumEstimate(
        freqs, values.astype(complex), kind="auto", dt=series.dt, source_window=window
    )
    cov = spectrum_to_covariance(spec)
    return cov, spec

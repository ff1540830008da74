"""Weighted mean and variance estimators over valid samples.

The raw variance estimator subtracts an estimated (not true) mean and is
therefore biased low by exactly the variance of the mean estimator; the
corrected variance adds that term back, generalizing the classical
N/(N-1) correction to correlated, gappy data.
"""
from __future__ import annotations

import numpy as np

from .core import CovarianceEstimate, GappySeries, MomentSummary, weight_fingerprint
from .covariance import pair_counts
from .errors import AllInvalidError, FingerprintMismatchError, TruncationError

__all__ = [
    "weighted_mean",
    "weighted_variance",
    "mean_estimator_variance",
    "corrected_variance",
]


def weighted_mean(series: GappySeries) -> float:
    """Mean of the valid samples: (sum w_i z_i) / (sum w_i)."""
    d = series.total_weight
    if not d > 0:
        raise AllInvalidError("cannot take the mean of an all-invalid series")
    return float(np.dot(series.weights, series.values) / d)


def weighted_variance(series: GappySeries) -> float:
    """Raw variance s^2 = (1/D) sum w_i (z_i - zbar)^2, zbar the weighted mean."""
    d = series.total_weight
    if not d > 0:
        raise AllInvalidError("cannot take the variance of an all-invalid series")
    dev = series.values - weighted_mean(series)
    return float(np.dot(series.weights, dev * dev) / d)


def _as_weights(weights) -> np.ndarray:
    if isinstance(weights, GappySeries):
        return weights.weights
    return np.asarray(weights, dtype=float)


def mean_estimator_variance(
    weights, gamma: CovarianceEstimate, allow_truncation: bool = False
) -> float:
    """Variance of the weighted mean for a given covariance function.

    Evaluates (1/D^2) sum_{i,j} w_i w_j gamma_{j-i} in the algebraically
    identical lag-histogram form (1/D^2) sum_k W_k gamma_k using FFT pair
    counts, O(N log N) instead of O(N^2).

    ``gamma`` must cover every lag at which pairs exist (W_k > 0); with
    ``allow_truncation=True`` covariances outside its window are treated
    as zero instead, which is only valid when the process has no
    correlations beyond the window.
    """
    w = _as_weights(weights)
    d = w.sum()
    if not d > 0:
        raise AllInvalidError("all weights are zero")
    acc = pair_counts(w)
    win = gamma.window
    covered = (acc.lags >= win.k1) & (acc.lags <= win.k2)
    if not allow_truncation:
        uncovered = acc.lags[(acc.W > 0) & ~covered]
        if len(uncovered):
            raise TruncationError(
                f"pairs exist at lags {uncovered.tolist()} outside the covariance "
                f"window {win.k1}:{win.k2}; pass allow_truncation=True to treat "
                f"those covariances as zero"
            )
    inside = acc.W[covered]
    gamma_vals = gamma.values[acc.lags[covered] - win.k1]
    return float(np.dot(inside, gamma_vals) / d**2)


def corrected_variance(
    series: GappySeries, corrected_cov: CovarianceEstimate
) -> MomentSummary:
    """Bias-free variance from a corrected autocovariance estimate.

    Evaluates the mean-estimator variance with the corrected
    autocovariance in place of the unknown true one, then returns
    s^2 + sigma_zbar^2 along with the ingredients.
    """
    if corrected_cov.kind != "auto":
        raise ValueError("corrected_variance requires an autocovariance estimate")
    if not corrected_cov.corrected:
        raise ValueError("corrected_cov must be a bias-corrected estimate")
    expected = weight_fingerprint(series.weights, kind="auto")
    if corrected_cov.source_fingerprint != expected:
        raise FingerprintMismatchError(
            "corrected covariance was not computed from this series' weights"
        )
    d = series.total_weight
    if not d > 0:
        raise AllInvalidError("all weights are zero")
    s2 = weighted_variance(series)
    # Out-of-window covariances are zero by the window-choice assumption
    # already made when the correction matrix was built.
    sig2 = mean_estimator_variance(series.weights, corrected_cov, allow_truncation=True)
    return MomentSummary(
        mean=weighted_mean(series),
        raw_variance=s2,
        mean_estimator_variance=sig2,
        corrected_variance=s2 + sig2,
        total_weight=d,
    )

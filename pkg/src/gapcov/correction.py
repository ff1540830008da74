"""Short-record bias correction for covariance estimates.

Subtracting an estimated mean makes the pair-averaged covariance
estimator biased.  The bias is linear in the true covariance, so for a
fixed masking pattern a K x K matrix A maps the true covariance on a lag
window onto the expectation of the estimate.  Solving A chat = C yields
a bias-free estimate, valid whenever the true covariance vanishes
outside the window.

Matrix elements (auto case, row k, column j over window lags):

    a_kj = delta_{k-j} + W_j / D^2 - (G_kj + H_kj) / (D W_k)

with triple-product sums G_kj = sum_i w_i w_{i+j} w_{i+k} and
H_kj = sum_i w_i w_{i+j} w_{i+j-k}; the cross case splits the G/H term
over the two weight sequences.  G and H can be assembled by direct sums
or per-row FFTs; both routes are exposed for cross-validation.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import CovarianceEstimate, LagWindow, MappingMatrix, weight_fingerprint
from .errors import (
    FingerprintMismatchError,
    PairCoverageError,
    SingularMatrixError,
    WindowError,
)

__all__ = [
    "TripleAccumulators",
    "triple_products_auto",
    "triple_products_cross",
    "build_auto_matrix",
    "build_cross_matrix",
    "correct_covariance",
    "predict_expected_covariance",
]

# Above this K*N product the per-row FFT assembly wins over direct sums.
_FFT_CROSSOVER_OPS = 2**20

DEFAULT_CONDITION_THRESHOLD = 1e12


@dataclass(frozen=True, eq=False)
class TripleAccumulators:
    """Triple-product weight sums G and H over a K x K lag grid."""

    G: np.ndarray
    H: np.ndarray
    window: LagWindow


def _pair_weights_auto(w: np.ndarray, lags: np.ndarray) -> np.ndarray:
    n = len(w)
    out = np.empty(len(lags))
    for i, k in enumerate(lags):
        if abs(k) >= n:
            out[i] = 0.0
        elif k >= 0:
            out[i] = np.dot(w[: n - k], w[k:])
        else:
            out[i] = np.dot(w[-k:], w[: n + k])
    return out


def _pair_weights_cross(wx: np.ndarray, wy: np.ndarray, lags: np.ndarray) -> np.ndarray:
    nx, ny = len(wx), len(wy)
    out = np.empty(len(lags))
    for i, k in enumerate(lags):
        i1 = max(0, -k)
        i2 = min(nx, ny - k) - 1
        out[i] = np.dot(wx[i1 : i2 + 1], wy[i1 + k : i2 + 1 + k]) if i2 >= i1 else 0.0
    return out


def _shifted_padded(w: np.ndarray, shift: int, m: int) -> np.ndarray:
    """Length-m array holding w[i+shift] at index i (zero outside)."""
    n = len(w)
    out = np.zeros(m)
    if shift >= 0:
        if shift < n:
            out[: n - shift] = w[shift:]
    else:
        out[-shift : n - shift] = w
    return out


def _triples_auto_direct(w: np.ndarray, lags: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    n = len(w)
    K = len(lags)
    G = np.zeros((K, K))
    H = np.zeros((K, K))
    for a, k in enumerate(lags):
        for b, j in enumerate(lags):
            lo = max(0, -j, -k)
            hi = min(n, n - j, n - k)
            if hi > lo:
                G[a, b] = np.dot(w[lo:hi] * w[lo + j : hi + j], w[lo + k : hi + k])
            lo = max(0, -j, k - j)
            hi = min(n, n - j, n + k - j)
            if hi > lo:
                H[a, b] = np.dot(w[lo:hi] * w[lo + j : hi + j], w[lo + j - k : hi + j - k])
    return G, H


def _triples_auto_fft(w: np.ndarray, lags: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    n = len(w)
    m = 2 * n
    wpad = np.zeros(m)
    wpad[:n] = w
    fw = np.fft.rfft(wpad)
    idx = np.mod(lags, m)
    K = len(lags)
    G = np.empty((K, K))
    H = np.empty((K, K))
    for a, k in enumerate(lags):
        gk = np.fft.irfft(np.conj(np.fft.rfft(wpad * _shifted_padded(w, k, m))) * fw, m)
        hk = np.fft.irfft(np.conj(fw) * np.fft.rfft(wpad * _shifted_padded(w, -k, m)), m)
        G[a] = gk[idx]
        H[a] = hk[idx]
    return G, H


def _triples_cross_direct(
    wx: np.ndarray, wy: np.ndarray, lags: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    nx, ny = len(wx), len(wy)
    K = len(lags)
    G = np.zeros((K, K))
    H = np.zeros((K, K))
    for a, k in enumerate(lags):
        for b, j in enumerate(lags):
            lo = max(0, -j, -k)
            hi = min(nx, ny - j, ny - k)
            if hi > lo:
                G[a, b] = np.dot(wx[lo:hi] * wy[lo + j : hi + j], wy[lo + k : hi + k])
            lo = max(0, -j, k - j)
            hi = min(nx, ny - j, nx + k - j)
            if hi > lo:
                H[a, b] = np.dot(
                    wx[lo:hi] * wy[lo + j : hi + j], wx[lo + j - k : hi + j - k]
                )
    return G, H


def _triples_cross_fft(
    wx: np.ndarray, wy: np.ndarray, lags: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    nx, ny = len(wx), len(wy)
    m = nx + ny
    wxpad = np.zeros(m)
    wxpad[:nx] = wx
    wypad = np.zeros(m)
    wypad[:ny] = wy
    fwx = np.fft.rfft(wxpad)
    fwy = np.fft.rfft(wypad)
    idx = np.mod(lags, m)
    K = len(lags)
    G = np.empty((K, K))
    H = np.empty((K, K))
    for a, k in enumerate(lags):
        gin = wxpad * _shifted_padded(wy, k, m)
        hin = wypad * _shifted_padded(wx, -k, m)
        G[a] = np.fft.irfft(np.conj(np.fft.rfft(gin)) * fwy, m)[idx]
        H[a] = np.fft.irfft(np.conj(fwx) * np.fft.rfft(hin), m)[idx]
    return G, H


def _pick_method(method: str, k: int, n: int) -> str:
    if method not in ("auto", "direct", "fft"):
        raise ValueError(f"method must be 'auto', 'direct' or 'fft', got {method!r}")
    if method == "auto":
        return "fft" if k * n > _FFT_CROSSOVER_OPS else "direct"
    return method


def triple_products_auto(
    weights, window: LagWindow, method: str = "auto"
) -> TripleAccumulators:
    w = np.asarray(weights, dtype=float)
    route = _pick_method(method, len(window), len(w))
    fn = _triples_auto_fft if route == "fft" else _triples_auto_direct
    G, H = fn(w, window.lags())
    return TripleAccumulators(G, H, window)


def triple_products_cross(
    wx, wy, window: LagWindow, method: str = "auto"
) -> TripleAccumulators:
    wx = np.asarray(wx, dtype=float)
    wy = np.asarray(wy, dtype=float)
    route = _pick_method(method, len(window), max(len(wx), len(wy)))
    fn = _triples_cross_fft if route == "fft" else _triples_cross_direct
    G, H = fn(wx, wy, window.lags())
    return TripleAccumulators(G, H, window)


def build_auto_matrix(weights, window: LagWindow, method: str = "auto") -> MappingMatrix:
    """Bias-mapping matrix A for an autocovariance window."""
    w = np.asarray(weights, dtype=float)
    n = len(w)
    window.check_correctable_auto(n)
    lags = window.lags()
    wk = _pair_weights_auto(w, lags)
    bad = [int(k) for k, v in zip(lags, wk) if not v > 0]
    if bad:
        raise PairCoverageError(bad)
    d = w.sum()
    acc = triple_products_auto(w, window, method=method)
    a = np.eye(len(lags)) + wk[None, :] / d**2 - (acc.G + acc.H) / (d * wk[:, None])
    return MappingMatrix(a, window, weight_fingerprint(w, kind="auto"), kind="auto")


def build_cross_matrix(wx, wy, window: LagWindow, method: str = "auto") -> MappingMatrix:
    """Bias-mapping matrix A_xy for a cross-covariance window."""
    wx = np.asarray(wx, dtype=float)
    wy = np.asarray(wy, dtype=float)
    window.check_correctable_cross(len(wx), len(wy))
    lags = window.lags()
    wk = _pair_weights_cross(wx, wy, lags)
    bad = [int(k) for k, v in zip(lags, wk) if not v > 0]
    if bad:
        raise PairCoverageError(bad)
    dx = wx.sum()
    dy = wy.sum()
    acc = triple_products_cross(wx, wy, window, method=method)
    a = (
        np.eye(len(lags))
        + wk[None, :] / (dx * dy)
        - acc.G / (dy * wk[:, None])
        - acc.H / (dx * wk[:, None])
    )
    return MappingMatrix(a, window, weight_fingerprint(wx, wy, kind="cross"), kind="cross")


def correct_covariance(
    raw: CovarianceEstimate,
    matrix: MappingMatrix,
    condition_threshold: float = DEFAULT_CONDITION_THRESHOLD,
) -> CovarianceEstimate:
    """Solve A chat = C for the bias-free covariance estimate.

    Uses a partial-pivoting solve (no explicit inverse) and attaches the
    condition-number estimate to the result; a condition estimate above
    ``condition_threshold`` raises :class:`SingularMatrixError` instead.
    """
    if raw.corrected:
        raise ValueError("estimate is already corrected")
    if raw.kind != matrix.kind:
        raise FingerprintMismatchError(
            f"estimate kind {raw.kind!r} does not match matrix kind {matrix.kind!r}"
        )
    if raw.window != matrix.window:
        raise WindowError(
            f"estimate window {raw.window.k1}:{raw.window.k2} does not match "
            f"matrix window {matrix.window.k1}:{matrix.window.k2}"
        )
    if raw.source_fingerprint != matrix.weight_fingerprint:
        raise FingerprintMismatchError(
            "estimate and mapping matrix were built from different weight sequences"
        )
    cond = float(np.linalg.cond(matrix.entries))
    if not np.isfinite(cond) or cond > condition_threshold:
        raise SingularMatrixError(cond, condition_threshold)
    corrected = np.linalg.solve(matrix.entries, raw.values)
    return CovarianceEstimate(
        raw.lags,
        corrected,
        raw.pair_weights,
        raw.dt,
        kind=raw.kind,
        corrected=True,
        source_fingerprint=raw.source_fingerprint,
        condition=cond,
    )


def predict_expected_covariance(matrix: MappingMatrix, gamma) -> np.ndarray:
    """Expectation A @ gamma of the raw estimate for a hypothetical truth."""
    g = np.asarray(gamma, dtype=float)
    if g.shape != (len(matrix.window),):
        raise ValueError(
            f"gamma has length {g.shape}, expected {len(matrix.window)} window lags"
        )
    return matrix.entries @ g

"""Power spectral densities from truncated covariance estimates.

S_j = dt * sum_{k=K1}^{K2} C_k exp(-2 pi i f_j k dt) on the frequency
grid f_j = j / (K dt), j = -floor(K/2) ... floor((K-1)/2).  No taper or
window function is ever applied to the covariance.  Auto windows must be
the centered lag range; cross windows may start anywhere, handled by an
exact per-frequency phase factor.
"""
from __future__ import annotations

import numpy as np

from .core import CovarianceEstimate, LagWindow, SpectrumEstimate
from .errors import WindowError

__all__ = [
    "covariance_to_spectrum",
    "spectrum_to_covariance",
    "spectrum_frequencies",
    "verify_identities",
]


def spectrum_frequencies(k: int, dt: float) -> np.ndarray:
    """Ascending frequency grid j/(K dt), j = -floor(K/2) ... floor((K-1)/2)."""
    j = np.arange(-(k // 2), (k - 1) // 2 + 1)
    return j / (k * dt)


def _signed_j(k: int) -> np.ndarray:
    return np.arange(-(k // 2), (k - 1) // 2 + 1)


def covariance_to_spectrum(cov: CovarianceEstimate) -> SpectrumEstimate:
    """Transform a covariance window into the corresponding spectral density."""
    k = len(cov)
    win = cov.window
    if cov.kind == "auto" and not win.is_centered:
        raise WindowError(
            f"auto spectra require the centered lag window "
            f"{-(k // 2)}:{(k - 1) // 2}, got {win.k1}:{win.k2}"
        )
    j = _signed_j(k)
    if cov.kind == "auto":
        # Place C_k at DFT index k mod K, transform, reorder to ascending j.
        rotated = np.roll(cov.values, win.k1)
        transformed = np.fft.fft(rotated)
        values = cov.dt * np.roll(transformed, k // 2)
    else:
        # DFT of window-ordered values plus a per-frequency phase for the
        # window start K1; exact for any contiguous window.
        transformed = np.fft.fft(np.asarray(cov.values, dtype=complex))
        phase = np.exp(-2j * np.pi * j * win.k1 / k)
        values = cov.dt * phase * transformed[np.mod(j, k)]
    return SpectrumEstimate(
        spectrum_frequencies(k, cov.dt), values, kind=cov.kind,
        dt=cov.dt, source_window=win,
    )


def spectrum_to_covariance(spec: SpectrumEstimate) -> CovarianceEstimate:
    """Invert :func:`covariance_to_spectrum`; round-trips to 1e-12.

    Pair weights are not recoverable from a spectrum and are set to one.
    """
    k = len(spec)
    win = spec.source_window
    if win is None:
        raise WindowError("spectrum carries no source window; cannot invert")
    if len(win) != k:
        raise WindowError("spectrum length does not match its source window")
    j = _signed_j(k)
    if spec.kind == "auto":
        transformed = np.roll(spec.values, -(k // 2))
        values = np.fft.ifft(transformed) / spec.dt
        values = np.roll(values, -win.k1)
    else:
        phase = np.exp(2j * np.pi * j * win.k1 / k)
        natural = np.empty(k, dtype=complex)
        natural[np.mod(j, k)] = spec.values * phase
        values = np.fft.ifft(natural) / spec.dt
    return CovarianceEstimate(
        win.lags(),
        values.real,
        np.ones(k),
        spec.dt,
        kind=spec.kind,
    )


def verify_identities(
    cov: CovarianceEstimate, spec: SpectrumEstimate | None = None, tol: float = 1e-12
) -> list[str]:
    """Check the exact transform identities on one covariance/spectrum pair.

    Verified:
      * zero-frequency identity S_0 = dt * sum_k C_k,
      * spectrum -> covariance round trip,
      * vanishing imaginary parts for auto spectra whose source covariance
        is symmetric in +-k (unpaired boundary lags of even-size windows
        contribute exactly real terms and do not break the premise).

    Returns a list of violation descriptions; empty when all hold.
    """
    if spec is None:
        spec = covariance_to_spectrum(cov)
    problems = []
    k = len(cov)
    scale = max(np.abs(spec.values).max(), 1e-300)

    s0 = spec.values[k // 2]
    total = cov.dt * cov.values.sum()
    ref = max(abs(total), cov.dt * np.abs(cov.values).sum(), 1e-300)
    if abs(s0 - total) > tol * ref:
        problems.append(f"zero-frequency identity off by {abs(s0 - total) / ref:.2e}")

    back = spectrum_to_covariance(spec)
    cref = max(np.abs(cov.values).max(), 1e-300)
    err = np.abs(back.values - cov.values).max()
    if err > tol * cref:
        problems.append(f"round trip off by {err / cref:.2e} relative")

    if cov.kind == "auto":
        win = cov.window
        paired = [kk for kk in cov.lags if kk > 0 and -kk >= win.k1]
        asym = max(
            (abs(cov.value_at(kk) - cov.value_at(-kk)) for kk in paired), default=0.0
        )
        if asym <= tol * cref:
            imag = np.abs(spec.values.imag).max()
            real_ref = max(np.abs(spec.values.real).max(), 1e-300)
            if imag > tol * real_ref:
                problems.append(f"auto spectrum imaginary residue {imag / real_ref:.2e}")
    return problems

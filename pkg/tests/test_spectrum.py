import numpy as np
import pytest

from gapcov import (
    CovarianceEstimate,
    GappySeries,
    LagWindow,
    SpectrumEstimate,
    WindowError,
    autocovariance_fft,
    build_auto_matrix,
    correct_covariance,
    covariance_to_spectrum,
    crosscovariance_fft,
    spectrum_frequencies,
    spectrum_to_covariance,
    verify_identities,
)
from oracles import dft_direct


def make_cov(lags, values, dt=1.0, kind="auto"):
    return CovarianceEstimate(lags, values, np.ones(len(lags)), dt, kind=kind)


class TestFrequencyGrid:
    def test_even(self):
        f = spectrum_frequencies(50, 1.0)
        assert f[0] == -0.5
        assert f[-1] == pytest.approx(0.48)
        assert len(f) == 50

    def test_odd(self):
        f = spectrum_frequencies(5, 2.0)
        np.testing.assert_allclose(f, [-0.2, -0.1, 0.0, 0.1, 0.2])


class TestForwardTransform:
    def test_white_delta_is_flat(self):
        k = 16
        win = LagWindow.centered(k)
        vals = np.zeros(k)
        vals[k // 2] = 2.5  # lag 0
        spec = covariance_to_spectrum(make_cov(win.lags(), vals, dt=1.0))
        np.testing.assert_allclose(spec.values.real, 2.5, rtol=1e-12)
        np.testing.assert_allclose(spec.values.imag, 0.0, atol=1e-14)

    def test_cosine_gives_lines(self):
        k, m, c, dt = 24, 5, 1.4, 0.5
        win = LagWindow.centered(k)
        vals = c * np.cos(2 * np.pi * win.lags() * m / k)
        spec = covariance_to_spectrum(make_cov(win.lags(), vals, dt=dt))
        j = np.arange(-(k // 2), (k - 1) // 2 + 1)
        expected = np.zeros(k)
        expected[np.abs(j) == m] = c * k * dt / 2
        np.testing.assert_allclose(spec.values.real, expected, atol=1e-12)

    def test_zero_frequency_identity(self):
        rng = np.random.default_rng(0)
        k = 21
        win = LagWindow.centered(k)
        vals = rng.standard_normal(k)
        cov = make_cov(win.lags(), vals, dt=0.25)
        spec = covariance_to_spectrum(cov)
        s0 = spec.values[k // 2]
        assert abs(s0 - 0.25 * vals.sum()) <= 1e-12 * max(abs(vals).sum() * 0.25, 1e-30)

    def test_mean_identity_recovers_lag_zero(self):
        rng = np.random.default_rng(1)
        k = 20
        win = LagWindow.centered(k)
        vals = rng.standard_normal(k)
        cov = make_cov(win.lags(), vals, dt=2.0)
        spec = covariance_to_spectrum(cov)
        c0 = spec.values.sum().real / (k * cov.dt)
        assert c0 == pytest.approx(vals[k // 2], rel=1e-12, abs=1e-13)

    def test_matches_direct_summation_auto(self):
        rng = np.random.default_rng(2)
        for k in (7, 12, 50):
            win = LagWindow.centered(k)
            vals = rng.standard_normal(k)
            cov = make_cov(win.lags(), vals, dt=0.7)
            spec = covariance_to_spectrum(cov)
            _, expect = dft_direct(vals, win.lags(), 0.7)
            assert np.abs(spec.values - expect).max() <= 1e-10 * np.abs(expect).max()

    def test_matches_direct_summation_cross(self):
        rng = np.random.default_rng(3)
        for k1, k2 in ((-20, 29), (0, 9), (-7, 3)):
            win = LagWindow(k1, k2)
            vals = rng.standard_normal(len(win))
            cov = make_cov(win.lags(), vals, dt=1.5, kind="cross")
            spec = covariance_to_spectrum(cov)
            _, expect = dft_direct(vals, win.lags(), 1.5)
            assert np.abs(spec.values - expect).max() <= 1e-10 * np.abs(expect).max()

    def test_auto_requires_centered_window(self):
        with pytest.raises(WindowError):
            covariance_to_spectrum(make_cov(np.arange(0, 5), np.ones(5)))

    def test_linearity(self):
        rng = np.random.default_rng(4)
        k = 18
        win = LagWindow.centered(k)
        a = rng.standard_normal(k)
        b = rng.standard_normal(k)
        sa = covariance_to_spectrum(make_cov(win.lags(), a)).values
        sb = covariance_to_spectrum(make_cov(win.lags(), b)).values
        sab = covariance_to_spectrum(make_cov(win.lags(), a + b)).values
        np.testing.assert_allclose(sab, sa + sb, rtol=1e-12, atol=1e-12)


class TestRoundTrip:
    def test_auto_roundtrip(self):
        rng = np.random.default_rng(5)
        k = 50
        win = LagWindow.centered(k)
        vals = rng.standard_normal(k)
        cov = make_cov(win.lags(), vals, dt=0.5)
        back = spectrum_to_covariance(covariance_to_spectrum(cov))
        assert np.abs(back.values - vals).max() <= 1e-12 * np.abs(vals).max()
        assert np.array_equal(back.lags, cov.lags)

    def test_cross_roundtrip(self):
        rng = np.random.default_rng(6)
        win = LagWindow(-20, 29)
        vals = rng.standard_normal(len(win))
        cov = make_cov(win.lags(), vals, dt=2.0, kind="cross")
        back = spectrum_to_covariance(covariance_to_spectrum(cov))
        assert np.abs(back.values - vals).max() <= 1e-12 * np.abs(vals).max()

    def test_flat_spectrum_gives_delta(self):
        k = 10
        win = LagWindow.centered(k)
        spec = SpectrumEstimate(
            spectrum_frequencies(k, 1.0), np.full(k, 3.0 + 0j), kind="auto",
            dt=1.0, source_window=win,
        )
        cov = spectrum_to_covariance(spec)
        expected = np.zeros(k)
        expected[k // 2] = 3.0
        np.testing.assert_allclose(cov.values, expected, atol=1e-13)

    def test_missing_window_rejected(self):
        spec = SpectrumEstimate(spectrum_frequencies(4, 1.0), np.ones(4, complex))
        with pytest.raises(WindowError):
            spectrum_to_covariance(spec)


class TestRealityAndSymmetry:
    def test_auto_spectrum_real_for_estimates(self):
        rng = np.random.default_rng(7)
        z = rng.standard_normal(80)
        w = (rng.random(80) < 0.7).astype(float)
        w[:2] = 1
        for k in (21, 20):  # odd (symmetric) and even (boundary-lag) windows
            cov = autocovariance_fft(GappySeries(z, w), LagWindow.centered(k))
            spec = covariance_to_spectrum(cov)
            assert np.abs(spec.values.imag).max() <= 1e-12 * np.abs(spec.values.real).max()

    def test_cross_spectrum_hermitian(self):
        rng = np.random.default_rng(8)
        x = GappySeries(rng.standard_normal(60), np.ones(60))
        y = GappySeries(rng.standard_normal(60), np.ones(60))
        k = 15
        cov = crosscovariance_fft(x, y, LagWindow.centered(k))
        spec = covariance_to_spectrum(cov)
        j = np.arange(-(k // 2), (k - 1) // 2 + 1)
        for jj in range(1, k // 2 + 1):
            a = spec.values[j == jj][0]
            b = spec.values[j == -jj][0]
            assert a == pytest.approx(np.conj(b), rel=1e-10, abs=1e-12)


class TestVerifyIdentities:
    def test_clean_pair_passes(self):
        rng = np.random.default_rng(9)
        s = GappySeries(rng.standard_normal(64), np.ones(64))
        cov = autocovariance_fft(s, LagWindow.centered(17))
        assert verify_identities(cov) == []

    def test_corrected_on_odd_window_is_real(self):
        rng = np.random.default_rng(10)
        z = rng.standard_normal(100)
        w = (rng.random(100) < 0.6).astype(float)
        w[:2] = 1
        win = LagWindow.centered(21)
        cov = autocovariance_fft(GappySeries(z, w), win)
        chat = correct_covariance(cov, build_auto_matrix(w, win))
        assert verify_identities(chat) == []
        spec = covariance_to_spectrum(chat)
        assert np.abs(spec.values.imag).max() <= 1e-12 * np.abs(spec.values.real).max()

    def test_detects_broken_zero_frequency(self):
        k = 9
        win = LagWindow.centered(k)
        vals = np.ones(k)
        cov = make_cov(win.lags(), vals)
        spec = covariance_to_spectrum(cov)
        tampered = SpectrumEstimate(
            spec.frequencies, spec.values + 1.0, kind="auto", dt=1.0, source_window=win
        )
        assert any("zero-frequency" in p for p in verify_identities(cov, tampered))

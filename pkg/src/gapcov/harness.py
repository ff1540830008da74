"""Monte-Carlo experiment driver.

Runs repeated realizations of a configured signal-pair process through a
selected set of estimators, accumulates empirical mean / standard-error
/ RMS curves against the analytic truth, and writes plot-ready CSV files
plus a JSON manifest.  Runs are fully deterministic under a fixed base
seed: per-realization noise streams are derived from (base seed, process
seed, realization index), accumulation is order-independent, and result
CSVs are byte-identical across repeats (only the manifest carries a
timestamp and wall time).

Estimator failures on individual realizations (e.g. a gap pattern with
no valid pairs at some lag) are recorded and excluded from the averages
with a count; they are never silently dropped or resampled.
"""
from __future__ import annotations

import concurrent.futures
import dataclasses
import json
import os
import sys
import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import __version__
from .baselines import (
    lomb_scargle,
    lomb_scargle_offset_correct,
    lomb_scargle_on_window_grid,
    sample_and_hold,
)
from .core import CovarianceEstimate, GappySeries, LagWindow
from .correction import (
    DEFAULT_CONDITION_THRESHOLD,
    build_auto_matrix,
    build_cross_matrix,
    correct_covariance,
    predict_expected_covariance,
)
from .covariance import autocovariance_fft, crosscovariance_fft
from .errors import ConfigError, GapcovError
from .simulate import GapModelSpec, ProcessSpec, apply_gaps, generate_pair
from .spectrum import covariance_to_spectrum, spectrum_frequencies, verify_identities

__all__ = [
    "ESTIMATORS",
    "ExperimentConfig",
    "CurveStats",
    "ExperimentResult",
    "run_bias_experiment",
    "run_rms_experiment",
    "write_experiment_result",
    "write_rms_results",
    "config_from_json",
    "config_to_json",
]

ESTIMATORS = (
    "valid_only_raw",
    "valid_only_corrected",
    "sample_and_hold",
    "lomb_scargle_raw",
    "lomb_scargle_corrected",
)

# Lomb-Scargle applies to the auto quantities only.
_LS_ESTIMATORS = ("lomb_scargle_raw", "lomb_scargle_corrected")


@dataclass(frozen=True)
class ExperimentConfig:
    """Geometry, process, gap model and estimator selection of one run."""

    process: ProcessSpec
    gaps: GapModelSpec
    n_samples: int
    n_realizations: int
    window: LagWindow
    cross_window: LagWindow | None = None
    estimators: tuple = ("valid_only_raw", "valid_only_corrected")
    output_dir: str | None = None
    base_seed: int = 0
    dt: float = 1.0
    rms_sample_sizes: tuple | None = None
    lomb_alpha: object = "model"
    verify_identities: bool = False
    matrix_method: str = "auto"
    condition_threshold: float = DEFAULT_CONDITION_THRESHOLD
    threads: int = 1

    def __post_init__(self):
        object.__setattr__(self, "estimators", tuple(self.estimators))
        if self.n_realizations < 1:
            raise ConfigError("n_realizations must be >= 1")
        unknown = [e for e in self.estimators if e not in ESTIMATORS]
        if unknown:
            raise ConfigError(f"unknown estimators {unknown}; choose from {ESTIMATORS}")
        if not self.estimators:
            raise ConfigError("at least one estimator must be selected")
        if self.rms_sample_sizes is not None:
            object.__setattr__(
                self, "rms_sample_sizes", tuple(int(n) for n in self.rms_sample_sizes)
            )
        for n in self.sample_sizes():
            self.validate_windows(n)

    def sample_sizes(self) -> tuple:
        return self.rms_sample_sizes or (self.n_samples,)

    def validate_windows(self, n: int) -> None:
        if not self.window.is_centered:
            raise ConfigError(
                "the auto lag window must be the centered range "
                f"{-(len(self.window) // 2)}:{(len(self.window) - 1) // 2}"
            )
        if self.window.k1 < -(n - 1) or self.window.k2 > n - 1:
            raise ConfigError(f"auto window invalid for {n} samples")
        if "valid_only_corrected" in self.estimators:
            self.window.check_correctable_auto(n)
            if self.cross_window is not None:
                self.cross_window.check_correctable_cross(n, n)
        if self.cross_window is not None and (
            self.cross_window.k1 < -(n - 1) or self.cross_window.k2 > n - 1
        ):
            raise ConfigError(f"cross window invalid for {n} samples")


@dataclass(frozen=True, eq=False)
class CurveStats:
    """Empirical mean, standard error and RMS error of one curve."""

    mean: np.ndarray
    se: np.ndarray
    rms: np.ndarray
    n_included: int


@dataclass(eq=False)
class ExperimentResult:
    config: ExperimentConfig
    n_samples: int
    auto_lags: np.ndarray
    auto_freqs: np.ndarray
    ls_freqs: np.ndarray
    cross_lags: np.ndarray | None
    cross_freqs: np.ndarray | None
    truth: dict
    curves: dict
    excluded: dict
    failures: list
    identity_violations: list
    metadata: dict = field(default_factory=dict)

    def curve(self, estimator: str, quantity: str) -> CurveStats:
        return self.curves[(estimator, quantity)]


def _derived_seed(*parts: int) -> int:
    """Stable scalar seed from a tuple (documented mixing rule)."""
    return int(np.random.SeedSequence(entropy=tuple(int(p) for p in parts)).generate_state(1)[0])


def _alpha_for(config: ExperimentConfig, series: GappySeries):
    policy = config.lomb_alpha
    if policy == "model":
        if config.gaps.kind in ("bernoulli", "markov"):
            return config.gaps.stationary_valid_fraction()
        return None  # static mask: fall back to D/N
    if policy in (None, "estimate"):
        return None
    return float(policy)


def _truth_spectrum(lags: np.ndarray, gamma: np.ndarray, dt: float, kind: str) -> np.ndarray:
    cov = CovarianceEstimate(lags, gamma, np.ones(len(lags)), dt, kind=kind)
    return covariance_to_spectrum(cov).values


class _Engine:
    """Per-size experiment state: truth curves, grids, accumulators."""

    def __init__(self, config: ExperimentConfig, n: int):
        self.config = config
        self.n = n
        # Re-key the component seeds under the base seed so distinct base
        # seeds give fully distinct (but reproducible) experiments.
        self.process = replace(
            config.process, seed=_derived_seed(config.base_seed, config.process.seed, 1)
        )
        self.gaps = replace(
            config.gaps, seed=_derived_seed(config.base_seed, config.gaps.seed, 2)
        )
        self.window = config.window
        self.xwindow = config.cross_window
        truth = self.process.truth()
        k = len(self.window)
        self.auto_lags = self.window.lags()
        self.auto_freqs = spectrum_frequencies(k, config.dt)
        self.ls_freqs = self.auto_freqs[self.auto_freqs > 0]
        self.gamma_auto = truth.autocovariance(self.auto_lags)
        self.truth = {
            "auto_cov": self.gamma_auto,
            "auto_spec": _truth_spectrum(self.auto_lags, self.gamma_auto, config.dt, "auto"),
        }
        self.truth["ls_spec"] = self.truth["auto_spec"][self.auto_freqs > 0].real
        if self.xwindow is not None:
            self.cross_lags = self.xwindow.lags()
            self.cross_freqs = spectrum_frequencies(len(self.xwindow), config.dt)
            self.gamma_cross = truth.crosscovariance(self.cross_lags)
            self.truth["cross_cov"] = self.gamma_cross
            self.truth["cross_spec"] = _truth_spectrum(
                self.cross_lags, self.gamma_cross, config.dt, "cross"
            )
        else:
            self.cross_lags = None
            self.cross_freqs = None

    # ---- per-realization computation -------------------------------------

    def quantities(self, estimator: str) -> list:
        qty = [("auto_cov", len(self.auto_lags), float), ("auto_spec", len(self.auto_freqs), complex)]
        if estimator in _LS_ESTIMATORS:
            qty = [("auto_cov", len(self.auto_lags), float), ("ls_spec", len(self.ls_freqs), float)]
        elif self.xwindow is not None:
            qty += [
                ("cross_cov", len(self.cross_lags), float),
                ("cross_spec", len(self.cross_freqs), complex),
            ]
        if estimator == "valid_only_corrected":
            qty.append(("auto_raw_deviation", len(self.auto_lags), float))
            if self.xwindow is not None:
                qty.append(("cross_raw_deviation", len(self.cross_lags), float))
        return qty

    def run_realization(self, r: int):
        config = self.config
        out = {}
        violations = []
        failures = []
        try:
            x0, y0, _ = generate_pair(self.process, self.n, realization=r, dt=config.dt)
            zx = apply_gaps(x0, self.gaps, realization=r, channel=0)
            zy = (
                apply_gaps(y0, self.gaps, realization=r, channel=1)
                if self.xwindow is not None
                else None
            )
        except GapcovError as exc:
            for est in config.estimators:
                failures.append((r, est, f"generation: {exc}"))
            return out, violations, failures

        def check(cov, spec):
            if config.verify_identities:
                violations.extend(f"r{r}: {v}" for v in verify_identities(cov, spec))

        raw_auto = raw_cross = None

        def get_raw_auto():
            nonlocal raw_auto
            if raw_auto is None:
                raw_auto = autocovariance_fft(zx, self.window)
            return raw_auto

        def get_raw_cross():
            nonlocal raw_cross
            if raw_cross is None:
                raw_cross = crosscovariance_fft(zx, zy, self.xwindow)
            return raw_cross

        for est in config.estimators:
            try:
                if est == "valid_only_raw":
                    cov = get_raw_auto()
                    spec = covariance_to_spectrum(cov)
                    check(cov, spec)
                    vals = {"auto_cov": cov.values, "auto_spec": spec.values}
                    if self.xwindow is not None:
                        ccov = get_raw_cross()
                        cspec = covariance_to_spectrum(ccov)
                        check(ccov, cspec)
                        vals["cross_cov"] = ccov.values
                        vals["cross_spec"] = cspec.values
                elif est == "valid_only_corrected":
                    cov = get_raw_auto()
                    a = build_auto_matrix(zx.weights, self.window, method=config.matrix_method)
                    corr = correct_covariance(cov, a, config.condition_threshold)
                    spec = covariance_to_spectrum(corr)
                    check(corr, spec)
                    predicted = predict_expected_covariance(a, self.gamma_auto)
                    vals = {
                        "auto_cov": corr.values,
                        "auto_spec": spec.values,
                        "auto_raw_deviation": cov.values - predicted,
                    }
                    if self.xwindow is not None:
                        ccov = get_raw_cross()
                        ax = build_cross_matrix(
                            zx.weights, zy.weights, self.xwindow, method=config.matrix_method
                        )
                        ccorr = correct_covariance(ccov, ax, config.condition_threshold)
                        cspec = covariance_to_spectrum(ccorr)
                        check(ccorr, cspec)
                        cpred = predict_expected_covariance(ax, self.gamma_cross)
                        vals["cross_cov"] = ccorr.values
                        vals["cross_spec"] = cspec.values
                        vals["cross_raw_deviation"] = ccov.values - cpred
                elif est == "sample_and_hold":
                    shx = sample_and_hold(zx)
                    cov = autocovariance_fft(shx, self.window)
                    spec = covariance_to_spectrum(cov)
                    check(cov, spec)
                    vals = {"auto_cov": cov.values, "auto_spec": spec.values}
                    if self.xwindow is not None:
                        shy = sample_and_hold(zy)
                        ccov = crosscovariance_fft(shx, shy, self.xwindow)
                        cspec = covariance_to_spectrum(ccov)
                        check(ccov, cspec)
                        vals["cross_cov"] = ccov.values
                        vals["cross_spec"] = cspec.values
                else:  # lomb_scargle_raw / lomb_scargle_corrected
                    alpha = _alpha_for(config, zx)
                    corrected = est == "lomb_scargle_corrected"
                    ls = lomb_scargle(zx, self.ls_freqs)
                    if corrected:
                        ls = lomb_scargle_offset_correct(ls, zx, alpha)
                    lcov, _ = lomb_scargle_on_window_grid(
                        zx, self.window, alpha_prime=alpha, correct_offset=corrected
                    )
                    vals = {"auto_cov": lcov.values, "ls_spec": ls.values}
                out[est] = vals
            except GapcovError as exc:
                failures.append((r, est, str(exc)))
        return out, violations, failures

    # ---- accumulation ------------------------------------------------------

    def run(self) -> ExperimentResult:
        config = self.config
        start = time.monotonic()
        R = config.n_realizations
        store = {}
        for est in config.estimators:
            for qty, width, kind in self.quantities(est):
                store[(est, qty)] = np.full(
                    (R, width), np.nan, dtype=complex if kind is complex else float
                )
        included = {est: np.zeros(R, dtype=bool) for est in config.estimators}
        all_violations = []
        all_failures = []

        def consume(r, result):
            out, violations, failures = result
            all_violations.extend(violations)
            all_failures.extend(failures)
            for est, vals in out.items():
                included[est][r] = True
                for qty, arr in vals.items():
                    store[(est, qty)][r] = arr

        threads = config.threads
        if threads > 1:
            with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as pool:
                for r, result in enumerate(pool.map(self.run_realization, range(R))):
                    consume(r, result)
        else:
            for r in range(R):
                consume(r, self.run_realization(r))

        curves = {}
        for est in config.estimators:
            mask = included[est]
            n_inc = int(mask.sum())
            for qty, _, kind in self.quantities(est):
                rows = store[(est, qty)][mask]
                if n_inc == 0:
                    width = store[(est, qty)].shape[1]
                    nanrow = np.full(width, np.nan)
                    curves[(est, qty)] = CurveStats(nanrow, nanrow, nanrow, 0)
                    continue
                mean = rows.mean(axis=0)
                if n_inc > 1:
                    if kind is complex:
                        var = rows.real.var(axis=0, ddof=1) + rows.imag.var(axis=0, ddof=1)
                    else:
                        rows = rows.real
                        mean = mean.real
                        var = rows.var(axis=0, ddof=1)
                    se = np.sqrt(var / n_inc)
                else:
                    se = np.full(rows.shape[1], np.nan)
                    if kind is not complex:
                        mean = mean.real
                        rows = rows.real
                truth = self.truth.get(qty)
                if qty.endswith("raw_deviation"):
                    truth = np.zeros(rows.shape[1])
                rms = np.sqrt(np.mean(np.abs(rows - truth) ** 2, axis=0))
                curves[(est, qty)] = CurveStats(mean, se, rms, n_inc)

        excluded = {est: R - int(included[est].sum()) for est in config.estimators}
        metadata = {
            "schema": 1,
            "n_samples": self.n,
            "n_realizations": R,
            "wall_time_s": time.monotonic() - start,
            "versions": {
                "gapcov": __version__,
                "numpy": np.__version__,
                "python": sys.version.split()[0],
            },
        }
        return ExperimentResult(
            config=config,
            n_samples=self.n,
            auto_lags=self.auto_lags,
            auto_freqs=self.auto_freqs,
            ls_freqs=self.ls_freqs,
            cross_lags=self.cross_lags,
            cross_freqs=self.cross_freqs,
            truth=self.truth,
            curves=curves,
            excluded=excluded,
            failures=all_failures,
            identity_violations=all_violations,
            metadata=metadata,
        )


def _env_threads(default: int) -> int:
    try:
        return max(1, int(os.environ.get("GAPCOV_THREADS", default)))
    except ValueError:
        return default


def run_bias_experiment(config: ExperimentConfig) -> ExperimentResult:
    """Empirical mean (and SE/RMS) curves for each selected estimator."""
    config = replace(config, threads=_env_threads(config.threads))
    result = _Engine(config, config.n_samples).run()
    if config.output_dir:
        write_experiment_result(result, config.output_dir)
    return result


def run_rms_experiment(config: ExperimentConfig) -> dict:
    """RMS-error curves at each configured record length."""
    config = replace(config, threads=_env_threads(config.threads))
    results = {}
    for n in config.sample_sizes():
        results[n] = _Engine(config, n).run()
    if config.output_dir:
        write_rms_results(results, config.output_dir)
    return results


# ---- serialization ----------------------------------------------------------


def config_to_json(config: ExperimentConfig, mode: str = "bias") -> dict:
    d = {
        "schema": 1,
        "mode": mode,
        "process": dataclasses.asdict(config.process),
        "gaps": dataclasses.asdict(config.gaps),
        "n_samples": config.n_samples,
        "n_realizations": config.n_realizations,
        "window": [config.window.k1, config.window.k2],
        "estimators": list(config.estimators),
        "base_seed": config.base_seed,
        "dt": config.dt,
        "lomb_alpha": config.lomb_alpha,
        "verify_identities": config.verify_identities,
        "matrix_method": config.matrix_method,
        "condition_threshold": config.condition_threshold,
        "threads": config.threads,
    }
    if config.cross_window is not None:
        d["cross_window"] = [config.cross_window.k1, config.cross_window.k2]
    if config.rms_sample_sizes is not None:
        d["rms_sample_sizes"] = list(config.rms_sample_sizes)
    if config.output_dir is not None:
        d["output_dir"] = config.output_dir
    return d


def config_from_json(data: dict) -> tuple[ExperimentConfig, str]:
    """Build a config from the JSON schema; returns (config, mode)."""
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    schema = data.get("schema")
    if schema != 1:
        raise ConfigError(f"unsupported config schema {schema!r}; expected 1")
    mode = data.get("mode", "bias")
    if mode not in ("bias", "rms"):
        raise ConfigError(f"mode must be 'bias' or 'rms', got {mode!r}")
    try:
        process = ProcessSpec(**data["process"])
        gaps = GapModelSpec(**data["gaps"])
        kwargs = dict(
            process=process,
            gaps=gaps,
            n_samples=int(data["n_samples"]),
            n_realizations=int(data["n_realizations"]),
            window=LagWindow(*data["window"]),
        )
    except KeyError as exc:
        raise ConfigError(f"config is missing required key {exc}") from exc
    except TypeError as exc:
        raise ConfigError(f"bad config field: {exc}") from exc
    if "cross_window" in data:
        kwargs["cross_window"] = LagWindow(*data["cross_window"])
    for key in (
        "estimators",
        "output_dir",
        "base_seed",
        "dt",
        "rms_sample_sizes",
        "lomb_alpha",
        "verify_identities",
        "matrix_method",
        "condition_threshold",
        "threads",
    ):
        if key in data:
            kwargs[key] = data[key]
    return ExperimentConfig(**kwargs), mode


# ---- output writing ----------------------------------------------------------


def _write_curve_csv(path, xname, xvals, stats: CurveStats, truth, complex_valued):
    def fx(x):
        return str(int(x)) if xname == "lag_index" else repr(float(x))

    lines = []
    if complex_valued:
        lines.append(f"{xname},mean_real,mean_imag,se,rms,truth_real,truth_imag")
        for x, m, s, rm, t in zip(xvals, stats.mean, stats.se, stats.rms, truth):
            t = complex(t)
            lines.append(
                f"{fx(x)},{float(m.real)!r},{float(m.imag)!r},{float(s)!r},"
                f"{float(rm)!r},{float(t.real)!r},{float(t.imag)!r}"
            )
    else:
        lines.append(f"{xname},mean,se,rms,truth")
        for x, m, s, rm, t in zip(xvals, stats.mean, stats.se, stats.rms, truth):
            lines.append(
                f"{fx(x)},{float(np.real(m))!r},{float(s)!r},{float(rm)!r},"
                f"{float(np.real(t))!r}"
            )
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def _grid_for(result: ExperimentResult, qty: str):
    return {
        "auto_cov": ("lag_index", result.auto_lags),
        "auto_raw_deviation": ("lag_index", result.auto_lags),
        "auto_spec": ("freq", result.auto_freqs),
        "ls_spec": ("freq", result.ls_freqs),
        "cross_cov": ("lag_index", result.cross_lags),
        "cross_raw_deviation": ("lag_index", result.cross_lags),
        "cross_spec": ("freq", result.cross_freqs),
    }[qty]


def write_experiment_result(result: ExperimentResult, out_dir) -> list:
    """Write per-curve CSVs and a manifest; returns the written paths."""
    os.makedirs(out_dir, exist_ok=True)
    written = []
    for (est, qty), stats in sorted(result.curves.items()):
        xname, xvals = _grid_for(result, qty)
        truth = result.truth.get(qty)
        if truth is None:
            truth = np.zeros(len(xvals))
        complex_valued = bool(np.iscomplexobj(stats.mean))
        path = os.path.join(out_dir, f"{qty}_{est}.csv")
        _write_curve_csv(path, xname, xvals, stats, truth, complex_valued)
        written.append(path)
    manifest = {
        "schema": 1,
        "config": config_to_json(result.config),
        "metadata": result.metadata,
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S"),
        "excluded": result.excluded,
        "included": {
            est: result.curves[(est, qty)].n_included
            for (est, qty) in result.curves
            if qty == "auto_cov"
            for est in [est]
        },
        "failures": [list(f) for f in result.failures[:50]],
        "n_failures": len(result.failures),
        "identity_violations": len(result.identity_violations),
        "identity_violation_examples": result.identity_violations[:10],
        "files": [os.path.basename(p) for p in written],
    }
    mpath = os.path.join(out_dir, "manifest.json")
    with open(mpath, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    written.append(mpath)
    return written


def write_rms_results(results: dict, out_dir) -> list:
    os.makedirs(out_dir, exist_ok=True)
    written = []
    for n, result in sorted(results.items()):
        written += write_experiment_result(result, os.path.join(out_dir, f"n{n}"))
    return written

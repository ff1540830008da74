"""Command-line interface.

Subcommands:
  estimate   covariance + spectrum CSVs for one series (or a pair)
  matrix     dump the bias-mapping matrix for a weight file and window
  simulate   run a configured Monte-Carlo experiment (JSON config)
  baseline   run a single comparison estimator

Exit status is 0 on success; failures print one machine-parsable line
``error: <Kind>: <message>`` on stderr and return a nonzero status
(2 for configuration/usage problems, 1 for runtime failures).
"""
from __future__ import annotations

import argparse
import json
import os
import sys

from .baselines import (
    interpolated_covariance_spectrum,
    lomb_scargle_on_window_grid,
)
from .core import LagWindow
from .correction import build_auto_matrix, build_cross_matrix, correct_covariance
from .covariance import autocovariance_fft, crosscovariance_fft
from .errors import ConfigError, GapcovError
from .harness import config_from_json, run_bias_experiment, run_rms_experiment
from .io import covariance_to_csv, matrix_to_csv, read_series_csv, spectrum_to_csv
from .spectrum import covariance_to_spectrum

__all__ = ["main", "cli_main"]


def _out_dir(args) -> str:
    return os.environ.get("GAPCOV_OUTPUT_DIR") or args.out or "."


def _write(path: str, text: str) -> None:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w") as fh:
        fh.write(text)
    print(f"wrote {path}")


def _cmd_estimate(args) -> int:
    window = LagWindow.parse(args.window)
    x = read_series_csv(args.input, dt=args.dt)
    out = _out_dir(args)
    if args.input2:
        y = read_series_csv(args.input2, dt=args.dt)
        cov = crosscovariance_fft(x, y, window)
        if args.correct:
            cov = correct_covariance(cov, build_cross_matrix(x.weights, y.weights, window))
        stem = "cross"
    else:
        cov = autocovariance_fft(x, window)
        if args.correct:
            cov = correct_covariance(cov, build_auto_matrix(x.weights, window))
        stem = "auto"
    suffix = "_corrected" if args.correct else ""
    _write(os.path.join(out, f"{stem}_covariance{suffix}.csv"), covariance_to_csv(cov))
    spec = covariance_to_spectrum(cov)
    _write(os.path.join(out, f"{stem}_spectrum{suffix}.csv"), spectrum_to_csv(spec))
    return 0


def _cmd_matrix(args) -> int:
    window = LagWindow.parse(args.window)
    w = read_series_csv(args.weights, dt=args.dt).weights
    if args.weights2:
        w2 = read_series_csv(args.weights2, dt=args.dt).weights
        matrix = build_cross_matrix(w, w2, window, method=args.method)
    else:
        matrix = build_auto_matrix(w, window, method=args.method)
    path = args.out or "matrix.csv"
    if os.environ.get("GAPCOV_OUTPUT_DIR") and not os.path.isabs(path):
        path = os.path.join(os.environ["GAPCOV_OUTPUT_DIR"], path)
    _write(path, matrix_to_csv(matrix))
    return 0


def _cmd_simulate(args) -> int:
    try:
        with open(args.config) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    config, mode = config_from_json(data)
    overrides = {}
    if args.seed is not None:
        overrides["base_seed"] = args.seed
    out = os.environ.get("GAPCOV_OUTPUT_DIR") or args.out or config.output_dir
    if not out:
        raise ConfigError("no output directory: pass --out or set output_dir in the config")
    overrides["output_dir"] = out
    import dataclasses

    config = dataclasses.replace(config, **overrides)
    if mode == "rms":
        results = run_rms_experiment(config)
        total_fail = sum(len(r.failures) for r in results.values())
        print(f"rms experiment done: sizes {sorted(results)} -> {out} ({total_fail} failures)")
    else:
        result = run_bias_experiment(config)
        print(
            f"bias experiment done: {result.metadata['n_realizations']} realizations "
            f"-> {out} ({len(result.failures)} failures)"
        )
    return 0


def _cmd_baseline(args) -> int:
    window = LagWindow.parse(args.window)
    series = read_series_csv(args.input, dt=args.dt)
    out = _out_dir(args)
    if args.method == "sample_and_hold":
        cov, spec = interpolated_covariance_spectrum(series, window)
    elif args.method in ("lomb_scargle", "lomb_scargle_corrected"):
        cov, spec = lomb_scargle_on_window_grid(
            series,
            window,
            alpha_prime=args.alpha_prime,
            correct_offset=args.method.endswith("corrected"),
        )
    else:
        raise ConfigError(f"unknown baseline method {args.method!r}")
    _write(
        os.path.join(out, f"baseline_covariance_{args.method}.csv"),
        covariance_to_csv(cov, method=args.method),
    )
    _write(
        os.path.join(out, f"baseline_spectrum_{args.method}.csv"),
        spectrum_to_csv(spec, method=args.method),
    )
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gapcov",
        description="Bias-free covariance and spectral estimation for gappy signals",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("estimate", help="estimate covariance and spectrum from CSV input")
    p.add_argument("--input", required=True, help="series CSV (index,value,weight)")
    p.add_argument("--input2", help="second series CSV for a cross estimate")
    p.add_argument("--window", required=True, help="lag window K1:K2, e.g. -25:24")
    p.add_argument("--dt", type=float, default=1.0, help="sampling interval (default 1)")
    p.add_argument("--correct", action="store_true", help="apply the short-record correction")
    p.add_argument("--out", help="output directory (default .)")
    p.set_defaults(func=_cmd_estimate)

    p = sub.add_parser("matrix", help="dump the bias-mapping matrix as CSV")
    p.add_argument("--weights", required=True, help="series CSV; its weight column is used")
    p.add_argument("--weights2", help="second weight CSV for a cross matrix")
    p.add_argument("--window", required=True, help="lag window K1:K2")
    p.add_argument("--dt", type=float, default=1.0)
    p.add_argument("--method", default="auto", choices=["auto", "direct", "fft"])
    p.add_argument("--out", help="output file (default matrix.csv)")
    p.set_defaults(func=_cmd_matrix)

    p = sub.add_parser("simulate", help="run a configured Monte-Carlo experiment")
    p.add_argument("--config", required=True, help="JSON experiment config (schema 1)")
    p.add_argument("--seed", type=int, help="override the base seed")
    p.add_argument("--out", help="output directory (overrides config)")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("baseline", help="run a single comparison estimator")
    p.add_argument("--input", required=True)
    p.add_argument("--window", required=True)
    p.add_argument("--dt", type=float, default=1.0)
    p.add_argument(
        "--method",
        required=True,
        choices=["sample_and_hold", "lomb_scargle", "lomb_scargle_corrected"],
    )
    p.add_argument("--alpha-prime", type=float, dest="alpha_prime",
                   help="valid-sample probability for the offset correction (default D/N)")
    p.add_argument("--out", help="output directory (default .)")
    p.set_defaults(func=_cmd_baseline)
    return parser


def _join_window_values(argv):
    """Let ``--window -25:24`` parse despite the leading dash."""
    out = []
    it = iter(argv)
    for tok in it:
        if tok == "--window":
            nxt = next(it, None)
            if nxt is None:
                out.append(tok)
            else:
                out.append(f"--window={nxt}")
        else:
            out.append(tok)
    return out


def cli_main(argv=None) -> int:
    parser = _build_parser()
    if argv is None:
        argv = sys.argv[1:]
    try:
        args = parser.parse_args(_join_window_values(argv))
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except GapcovError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()

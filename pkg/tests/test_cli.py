import json

import numpy as np
import pytest

from gapcov import GappySeries, write_series_csv
from gapcov.cli import cli_main


@pytest.fixture
def series_file(tmp_path):
    rng = np.random.default_rng(0)
    z = rng.standard_normal(64) + 2
    w = (rng.random(64) < 0.8).astype(float)
    w[:2] = 1.0
    path = tmp_path / "series.csv"
    write_series_csv(path, GappySeries(z, w))
    return path


class TestEstimate:
    def test_writes_two_csvs(self, series_file, tmp_path, capsys):
        out = tmp_path / "out"
        rc = cli_main([
            "estimate", "--input", str(series_file),
            "--window", "-8:7", "--correct", "--out", str(out),
        ])
        assert rc == 0
        assert (out / "auto_covariance_corrected.csv").exists()
        assert (out / "auto_spectrum_corrected.csv").exists()
        lines = (out / "auto_covariance_corrected.csv").read_text().splitlines()
        assert lines[0] == "lag_index,lag_time,value,pair_weight"
        assert len(lines) == 17

    def test_cross_estimate(self, series_file, tmp_path):
        rng = np.random.default_rng(1)
        other = tmp_path / "other.csv"
        write_series_csv(other, GappySeries(rng.standard_normal(64), np.ones(64)))
        out = tmp_path / "o2"
        rc = cli_main([
            "estimate", "--input", str(series_file), "--input2", str(other),
            "--window", "-5:9", "--out", str(out),
        ])
        assert rc == 0
        assert (out / "cross_covariance.csv").exists()
        assert (out / "cross_spectrum.csv").exists()

    def test_coverage_failure_exit_code(self, tmp_path, capsys):
        path = tmp_path / "holey.csv"
        write_series_csv(path, GappySeries([1.0, 2.0, 3.0], [1, 0, 1]))
        rc = cli_main(["estimate", "--input", str(path), "--window", "0:2"])
        assert rc == 1
        err = capsys.readouterr().err
        assert err.startswith("error: PairCoverageError:")


class TestMatrix:
    def test_dump_shape(self, series_file, tmp_path):
        out = tmp_path / "A.csv"
        rc = cli_main([
            "matrix", "--weights", str(series_file), "--window", "-5:5",
            "--out", str(out),
        ])
        assert rc == 0
        lines = out.read_text().splitlines()
        assert len(lines) == 12  # header + 11 rows
        assert lines[0].split(",")[1:] == [str(j) for j in range(-5, 6)]
        assert len(lines[1].split(",")) == 12


class TestSimulate:
    def test_runs_config(self, tmp_path):
        cfg = {
            "schema": 1,
            "mode": "bias",
            "process": {"ma_kernel": [1.0, 0.5], "mean": 8.0, "target_variance": 4.0, "seed": 1},
            "gaps": {"kind": "bernoulli", "valid_probability": 0.8, "seed": 2},
            "n_samples": 50,
            "n_realizations": 6,
            "window": [-6, 5],
            "estimators": ["valid_only_raw", "sample_and_hold"],
        }
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(cfg))
        out = tmp_path / "results"
        rc = cli_main(["simulate", "--config", str(cfg_path), "--out", str(out)])
        assert rc == 0
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["files"]
        assert (out / "auto_cov_sample_and_hold.csv").exists()

    def test_bad_schema_is_config_error(self, tmp_path, capsys):
        cfg_path = tmp_path / "bad.json"
        cfg_path.write_text(json.dumps({"schema": 99}))
        rc = cli_main(["simulate", "--config", str(cfg_path), "--out", str(tmp_path)])
        assert rc == 2
        assert "error: ConfigError:" in capsys.readouterr().err

    def test_malformed_json(self, tmp_path, capsys):
        cfg_path = tmp_path / "bad.json"
        cfg_path.write_text("{not json")
        rc = cli_main(["simulate", "--config", str(cfg_path)])
        assert rc == 2
        assert "error:" in capsys.readouterr().err

    def test_missing_file(self, tmp_path, capsys):
        rc = cli_main(["simulate", "--config", str(tmp_path / "nope.json")])
        assert rc == 2


class TestBaseline:
    def test_sample_and_hold(self, series_file, tmp_path):
        out = tmp_path / "b"
        rc = cli_main([
            "baseline", "--input", str(series_file), "--window", "-8:7",
            "--method", "sample_and_hold", "--out", str(out),
        ])
        assert rc == 0
        text = (out / "baseline_covariance_sample_and_hold.csv").read_text()
        assert text.splitlines()[0].endswith(",method")
        assert "sample_and_hold" in text.splitlines()[1]

    def test_lomb_scargle_corrected(self, series_file, tmp_path):
        out = tmp_path / "b2"
        rc = cli_main([
            "baseline", "--input", str(series_file), "--window", "-8:7",
            "--method", "lomb_scargle_corrected", "--alpha-prime", "0.8",
            "--out", str(out),
        ])
        assert rc == 0
        assert (out / "baseline_spectrum_lomb_scargle_corrected.csv").exists()


class TestEnvOverride:
    def test_output_dir_env(self, series_file, tmp_path, monkeypatch):
        env_out = tmp_path / "env_out"
        monkeypatch.setenv("GAPCOV_OUTPUT_DIR", str(env_out))
        rc = cli_main(["estimate", "--input", str(series_file), "--window", "-2:2"])
        assert rc == 0
        assert (env_out / "auto_covariance.csv").exists()

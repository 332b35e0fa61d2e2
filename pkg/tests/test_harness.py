import csv
import json
import math

import numpy as np
import pytest

from beamblind import ArrayGeometry, Denoiser, blind_snr, estimate_mse_blind, make_snapshot, sure_with_known_noise, to_beamspace
from beamblind.beamspace import ValidationError
from beamblind.channel import trial_seed
from beamblind.cli import main, parse_grid
from beamblind.harness import checks
from beamblind.harness.config import ExperimentConfig
from beamblind.harness.sweep import (
    CSV_COLUMNS,
    emit_csv,
    emit_figure_csvs,
    emit_plot,
    emit_trials,
    run_sweep,
)

SMALL = dict(trials=40, snr_grid_db=[-6.0, 0.0, 12.0], seed=5)


@pytest.fixture
def small_cfg(tmp_path):
    return ExperimentConfig(outputs=str(tmp_path), **SMALL)


class TestConfig:
    def test_defaults(self):
        cfg = ExperimentConfig()
        assert (cfg.M, cfg.L, cfg.N0, cfg.trials, cfg.lam) == (64, 3, 1.0, 10_000, 3.0)
        assert cfg.snr_grid_db[0] == -10 and cfg.snr_grid_db[-1] == 20 and len(cfg.snr_grid_db) == 16

    @pytest.mark.parametrize(
        "field,value", [("trials", 0), ("snr_grid_db", []), ("N0", 0.0), ("M", 1), ("gamma", -1.0), ("L", 0)]
    )
    def test_validation(self, field, value):
        with pytest.raises(ValidationError):
            ExperimentConfig.from_dict({field: value})

    def test_unknown_key(self):
        with pytest.raises(ValidationError):
            ExperimentConfig.from_dict({"trails": 3})

    def test_file_then_overrides(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({"trials": 7, "M": 32, "gamma": 4.0}))
        cfg = ExperimentConfig.load(path, trials=9, M=None)
        assert cfg.trials == 9 and cfg.M == 32 and cfg.gamma == 4.0

    def test_parse_grid(self):
        assert parse_grid("-2:2:1") == [-2.0, -1.0, 0.0, 1.0, 2.0]
        assert parse_grid("3, 5.5") == [3.0, 5.5]


def test_single_trial_matches_scalar_api():
    cfg = ExperimentConfig(trials=1, snr_grid_db=[0.0, 9.0], seed=3)
    res = run_sweep(cfg)
    geometry = ArrayGeometry(cfg.M)
    for k, snr in enumerate(cfg.snr_grid_db):
        snap = make_snapshot(geometry, cfg.L, 10 ** (snr / 10), cfg.N0, np.random.default_rng(trial_seed(cfg.seed, k, 0)))
        est = blind_snr(snap.y, cfg.gamma)
        y_b, x_b = to_beamspace(snap.y), to_beamspace(snap.x)
        den = Denoiser.soft_threshold(cfg.lam)
        assert res.mean["n0"][k] == pytest.approx(est.noise.n0_hat, rel=1e-12)
        assert res.mean["px"][k] == pytest.approx(est.p_x_hat, rel=1e-9, abs=1e-12)
        assert res.mean["rho"][k] == pytest.approx(est.rho_hat, rel=1e-9, abs=1e-12)
        assert res.mean["mse_blind"][k] == pytest.approx(estimate_mse_blind(y_b, den, est.noise).mse_hat, rel=1e-12)
        assert res.mean["mse_sure"][k] == pytest.approx(sure_with_known_noise(y_b, den, cfg.N0).mse_hat, rel=1e-12)
        assert res.mean["mse_true"][k] == pytest.approx(np.mean(np.abs(den(y_b) - x_b) ** 2), rel=1e-12)
        for key in res.std:
            assert res.std[key][k] == 0


def test_csv_format(small_cfg, tmp_path):
    res = run_sweep(small_cfg)
    path = emit_csv(res, tmp_path / "out.csv")
    lines = path.read_text().splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert lines[0] == (
        "snr_db,n0_mean,n0_std,px_mean,px_std,rho_mean_db,rho_std_db,"
        "mse_blind_mean,mse_sure_mean,mse_true_mean,trials"
    )
    assert len(lines) == 1 + len(small_cfg.snr_grid_db)
    rows = list(csv.DictReader(lines))
    # round-trip precision
    assert float(rows[1]["n0_mean"]) == res.mean["n0"][1]
    assert all(r["trials"] == "40" for r in rows)


def test_one_point_csv_has_two_lines(tmp_path):
    res = run_sweep(ExperimentConfig(trials=3, snr_grid_db=[5.0]))
    assert len(emit_csv(res, tmp_path / "a.csv").read_text().splitlines()) == 2


def test_csv_deterministic_across_runs_and_workers(small_cfg, tmp_path):
    a = emit_csv(run_sweep(small_cfg), tmp_path / "a.csv").read_bytes()
    b = emit_csv(run_sweep(small_cfg), tmp_path / "b.csv").read_bytes()
    c = emit_csv(run_sweep(small_cfg, workers=2), tmp_path / "c.csv").read_bytes()
    assert a == b == c


def test_trial_dump_reproduces_aggregates(small_cfg, tmp_path):
    res = run_sweep(small_cfg, keep_trials=True)
    path = emit_trials(res, tmp_path / "trials.csv")
    rows = list(csv.DictReader(path.open()))
    assert len(rows) == small_cfg.trials * len(small_cfg.snr_grid_db)
    for k in range(len(small_cfg.snr_grid_db)):
        sub = [r for r in rows if int(r["snr_index"]) == k]
        for key in ("n0", "px", "mse_blind", "mse_sure", "mse_true"):
            vals = np.array([float(r[key]) for r in sub])
            assert abs(vals.mean() - res.mean[key][k]) <= 1e-9
            assert abs(vals.std() - res.std[key][k]) <= 1e-9


def test_trial_dump_requires_keep_trials(small_cfg, tmp_path):
    with pytest.raises(ValueError):
        emit_trials(run_sweep(small_cfg), tmp_path / "t.csv")


def test_rho_db_is_ratio_of_mean_powers(small_cfg):
    res = run_sweep(small_cfg)
    expected = 10 * np.log10(res.mean["px"] / res.mean["n0"])
    np.testing.assert_allclose(res.rho_ratio_db, expected, rtol=1e-12)
    assert np.all(res.rho_spread_db >= 0)


def test_figure_csvs_carry_reference_series(small_cfg, tmp_path):
    res = run_sweep(small_cfg)
    paths = {p.name: p for p in emit_figure_csvs(res, tmp_path)}
    noise = list(csv.DictReader(paths["fig_noise_power.csv"].open()))
    assert all(float(r["n0_true"]) == 1.0 for r in noise)
    snr = list(csv.DictReader(paths["fig_snr.csv"].open()))
    assert all(r["rho_true_db"] == r["snr_db"] for r in snr)
    sig = list(csv.DictReader(paths["fig_signal_power.csv"].open()))
    assert float(sig[1]["px_true"]) == pytest.approx(1.0)
    mse = list(csv.DictReader(paths["fig_mse.csv"].open()))
    assert "mse_true_mean" in mse[0]


def test_plot_is_byte_identical(small_cfg, tmp_path):
    res = run_sweep(small_cfg)
    a = emit_plot(res, tmp_path / "a.svg").read_bytes()
    b = emit_plot(res, tmp_path / "b.svg").read_bytes()
    assert a == b
    assert a.lstrip().startswith(b"<?xml") and b"<svg" in a


class TestChecks:
    def test_unbiasedness_identity(self):
        cfg = ExperimentConfig(trials=2000)
        r = checks.run_unbiasedness_check(cfg, 3.0, Denoiser.identity())
        assert r.sure_mean == pytest.approx(1.0, abs=1e-12)
        assert r.passed

    def test_unbiasedness_zero(self):
        cfg = ExperimentConfig(trials=2000)
        r = checks.run_unbiasedness_check(cfg, 3.0, Denoiser.zero())
        assert r.mse_mean == pytest.approx(10**0.3, rel=1e-12)  # ||x||^2/M exactly
        assert r.passed

    def test_bench_single_size_is_report_only(self):
        r = checks.run_scaling_bench([64], inputs=4, repeats=1)
        assert r.ratios == [] and r.passed and math.isnan(r.mean_ratio)

    def test_bench_rejects_bad_sizes(self):
        with pytest.raises(ValueError):
            checks.run_scaling_bench([128, 64])

    def test_calibrate_gamma_small(self):
        cfg = ExperimentConfig(trials=200, snr_grid_db=[-10.0, 20.0])
        cal = checks.calibrate_gamma(cfg, [1.0, 3.0, 30.0])
        assert cal.mean_n0.shape == (3, 3)
        assert cal.best_gamma == cal.gamma_grid[np.argmin(cal.objective)]

    def test_committed_default_gamma_matches_calibration_record(self):
        from pathlib import Path

        from beamblind.estimators import DEFAULT_GAMMA

        record = json.loads((Path(__file__).parent.parent / "calibration" / "gamma_calibration.json").read_text())
        assert record["best_gamma"] == DEFAULT_GAMMA


class TestCli:
    def test_sweep_writes_outputs(self, tmp_path, capsys):
        out = tmp_path / "run"
        code = main(["sweep", "--trials", "5", "--snr-grid", "0,10", "--outputs", str(out), "--dump-trials"])
        assert code == 0
        names = {p.name for p in out.iterdir()}
        assert {"sweep.csv", "sweep.svg", "sweep_manifest.json", "trials.csv", "fig_noise_power.csv"} <= names
        manifest = json.loads((out / "sweep_manifest.json").read_text())
        assert manifest["seed"] == 2024 and manifest["config"]["trials"] == 5 and manifest["version"]
        assert capsys.readouterr().out.startswith("snr_db,")

    def test_config_file_and_flag_override(self, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"trials": 3, "snr_grid_db": [1.0], "seed": 11}))
        out = tmp_path / "o"
        assert main(["sweep", "--config", str(cfg), "--trials", "4", "--outputs", str(out), "--no-plot"]) == 0
        manifest = json.loads((out / "sweep_manifest.json").read_text())
        assert manifest["config"]["trials"] == 4 and manifest["seed"] == 11

    def test_invalid_config_exit_code(self, tmp_path, capsys):
        assert main(["sweep", "--trials", "0", "--outputs", str(tmp_path)]) == 2
        assert "trials" in capsys.readouterr().err

    def test_unwritable_output_exit_code(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("x")
        assert main(["sweep", "--trials", "2", "--snr-grid", "0", "--outputs", str(blocker / "sub")]) != 0

    def test_unbiasedness_command(self, tmp_path, capsys):
        code = main(["unbiasedness", "--trials", "3000", "--snr", "3", "--outputs", str(tmp_path)])
        assert code == 0
        assert capsys.readouterr().out.startswith("PASS")
        assert json.loads((tmp_path / "unbiasedness.json").read_text())[0]["passed"]

    def test_unbiasedness_failure_exit_code(self, tmp_path):
        # a handful of trials cannot meet 2% at low SNR with the identity denoiser
        code = main(["unbiasedness", "--trials", "2", "--snr", "-3", "--denoiser", "identity", "--outputs", str(tmp_path)])
        assert code == 1

    def test_bench_command(self, capsys):
        assert main(["bench", "--sizes", "64"]) == 0
        assert "single size" in capsys.readouterr().out

    def test_calibrate_command(self, tmp_path, capsys):
        code = main(
            ["calibrate-gamma", "--trials", "50", "--snr-grid", "0", "--gamma-grid", "2,4", "--outputs", str(tmp_path)]
        )
        assert code == 0
        rec = json.loads((tmp_path / "gamma_calibration.json").read_text())
        assert rec["best_gamma"] in (2.0, 4.0)

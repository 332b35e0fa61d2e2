"""Monte Carlo SNR sweep: simulate, aggregate, write CSV / SVG / manifest."""

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .. import __version__
from ..channel import ArrayGeometry, make_snapshot, trial_seed
from ..denoisers import Denoiser, apply, divergence
from ..estimators import estimate_noise_power_batch, sure_terms

CSV_COLUMNS = [
    "snr_db",
    "n0_mean",
    "n0_std",
    "px_mean",
    "px_std",
    "rho_mean_db",
    "rho_std_db",
    "mse_blind_mean",
    "mse_sure_mean",
    "mse_true_mean",
    "trials",
]

# per-trial quantities, in dump-file column order
TRIAL_FIELDS = ["n0", "i_star", "px", "rho", "mse_blind", "mse_sure", "mse_true"]
STAT_FIELDS = ["n0", "px", "rho", "mse_blind", "mse_sure", "mse_true"]

DB = 10.0 / math.log(10.0)


def _fmt(v):
    return repr(float(v))


def simulate_snapshots(config, snr_db, stream):
    """Stack ``config.trials`` snapshots at one SNR; trial t uses seed (seed, stream, t)."""
    geometry = ArrayGeometry(config.M, config.spacing)
    rho = 10.0 ** (snr_db / 10.0)
    ys = np.empty((config.trials, config.M), dtype=np.complex128)
    xs = np.empty_like(ys)
    for t in range(config.trials):
        rng = np.random.default_rng(trial_seed(config.seed, stream, t))
        snap = make_snapshot(geometry, config.L, rho, config.N0, rng)
        ys[t], xs[t] = snap.y, snap.x
    return ys, xs


def evaluate_trials(ys, xs, config):
    """Run every estimator on a stack of snapshots.  Returns per-trial arrays."""
    M = config.M
    yb = np.fft.fft(ys, axis=1, norm="ortho")
    xb = np.fft.fft(xs, axis=1, norm="ortho")
    p_sorted = np.sort(yb.real**2 + yb.imag**2, axis=1)
    n0, i_star = estimate_noise_power_batch(p_sorted, config.gamma)

    energy = np.sum(ys.real**2 + ys.imag**2, axis=1)
    px = np.maximum(energy - M * n0, 0.0) / M
    with np.errstate(divide="ignore", invalid="ignore"):
        rho = px / n0

    # denoising happens in beamspace, where the channel is sparse
    den = Denoiser.soft_threshold(config.lam)
    x_hat = apply(den, yb)
    div = divergence(den, yb)
    residual, div_blind = sure_terms(yb, x_hat, div, n0)
    _, div_known = sure_terms(yb, x_hat, div, config.N0)
    err = x_hat - xb
    return {
        "n0": n0,
        "i_star": i_star,
        "px": px,
        "rho": rho,
        "mse_blind": residual + n0 + div_blind,
        "mse_sure": residual + config.N0 + div_known,
        "mse_true": np.sum(err.real**2 + err.imag**2, axis=1) / M,
    }


def _run_point(args):
    config, index = args
    ys, xs = simulate_snapshots(config, config.snr_grid_db[index], index)
    return evaluate_trials(ys, xs, config)


@dataclass
class SweepResult:
    config: object
    snr_db: np.ndarray
    mean: dict
    std: dict
    trials: int
    rho_ratio_db: np.ndarray
    rho_spread_db: np.ndarray
    per_trial: list = field(default=None, repr=False)

    @property
    def rows(self):
        return len(self.snr_db)


def _rho_db_stats(px, n0):
    """SNR in dB from the ratio of mean powers, with its delta-method spread."""
    px_mean, n0_mean = px.mean(), n0.mean()
    if px_mean <= 0 or n0_mean <= 0:
        return -math.inf if px_mean == 0 else math.nan, math.nan
    centre = DB * math.log(px_mean / n0_mean)
    spread = float(np.std(DB * (px / px_mean - n0 / n0_mean)))
    return centre, spread


def aggregate(config, per_point, keep_trials=False):
    mean = {k: np.array([np.mean(p[k]) for p in per_point]) for k in STAT_FIELDS}
    std = {k: np.array([np.std(p[k]) for p in per_point]) for k in STAT_FIELDS}
    rho_db = [_rho_db_stats(p["px"], p["n0"]) for p in per_point]
    return SweepResult(
        config=config,
        snr_db=np.asarray(config.snr_grid_db, dtype=float),
        mean=mean,
        std=std,
        trials=config.trials,
        rho_ratio_db=np.array([r[0] for r in rho_db]),
        rho_spread_db=np.array([r[1] for r in rho_db]),
        per_trial=per_point if keep_trials else None,
    )


def run_sweep(config, workers=1, keep_trials=False):
    """Simulate every SNR grid point and aggregate.

    Each grid point is simulated whole by one worker and results are
    gathered in grid order, so the output does not depend on ``workers``.
    """
    config.validate()
    jobs = [(config, k) for k in range(len(config.snr_grid_db))]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            per_point = list(pool.map(_run_point, jobs))
    else:
        per_point = [_run_point(j) for j in jobs]
    return aggregate(config, per_point, keep_trials)


def csv_rows(result):
    for k, snr in enumerate(result.snr_db):
        yield [
            _fmt(snr),
            _fmt(result.mean["n0"][k]),
            _fmt(result.std["n0"][k]),
            _fmt(result.mean["px"][k]),
            _fmt(result.std["px"][k]),
            _fmt(result.rho_ratio_db[k]),
            _fmt(result.rho_spread_db[k]),
            _fmt(result.mean["mse_blind"][k]),
            _fmt(result.mean["mse_sure"][k]),
            _fmt(result.mean["mse_true"][k]),
            str(result.trials),
        ]


def _write_csv(path, header, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    return path


def emit_csv(result, path):
    """Write the summary table, one row per SNR point."""
    return _write_csv(path, CSV_COLUMNS, csv_rows(result))


def emit_figure_csvs(result, outdir):
    """One CSV per figure, each with its ground-truth reference column."""
    outdir = Path(outdir)
    N0 = result.config.N0
    snr = result.snr_db
    px_true = 10 ** (snr / 10) * N0
    m, s = result.mean, result.std
    tables = {
        "fig_noise_power.csv": (
            ["snr_db", "n0_true", "n0_mean", "n0_std"],
            zip(snr, np.full(snr.shape, N0), m["n0"], s["n0"]),
        ),
        "fig_signal_power.csv": (
            ["snr_db", "px_true", "px_mean", "px_std"],
            zip(snr, px_true, m["px"], s["px"]),
        ),
        "fig_snr.csv": (
            ["snr_db", "rho_true_db", "rho_mean_db", "rho_std_db", "rho_trial_mean", "rho_trial_std"],
            zip(snr, snr, result.rho_ratio_db, result.rho_spread_db, m["rho"], s["rho"]),
        ),
        "fig_mse.csv": (
            ["snr_db", "mse_true_mean", "mse_sure_mean", "mse_blind_mean", "mse_sure_std", "mse_blind_std"],
            zip(snr, m["mse_true"], m["mse_sure"], m["mse_blind"], s["mse_sure"], s["mse_blind"]),
        ),
    }
    written = []
    for name, (header, rows) in tables.items():
        written.append(_write_csv(outdir / name, header, ([_fmt(v) for v in row] for row in rows)))
    return written


def emit_trials(result, path):
    """Dump per-trial values (debug mode).  Requires ``keep_trials=True``."""
    if result.per_trial is None:
        raise ValueError("sweep was run without keep_trials")
    header = ["snr_index", "snr_db", "trial"] + TRIAL_FIELDS

    def rows():
        for k, point in enumerate(result.per_trial):
            for t in range(result.trials):
                vals = [_fmt(point[f][t]) if f != "i_star" else str(int(point[f][t])) for f in TRIAL_FIELDS]
                yield [str(k), _fmt(result.snr_db[k]), str(t)] + vals

    return _write_csv(path, header, rows())


def emit_plot(result, path):
    """Four-panel SVG: noise power, signal power, SNR and MSE against true SNR."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    snr = result.snr_db
    N0 = result.config.N0
    m = result.mean
    with matplotlib.rc_context({"svg.hashsalt": "beamblind", "svg.fonttype": "path"}):
        fig, axes = plt.subplots(2, 2, figsize=(10, 8))
        ax = axes[0, 0]
        ax.plot(snr, m["n0"], "o-", label="blind estimate")
        ax.plot(snr, np.full(snr.shape, N0), "k--", label="ground truth")
        ax.set_ylabel("average noise power")

        ax = axes[0, 1]
        ax.semilogy(snr, m["px"], "o-", label="blind estimate")
        ax.semilogy(snr, 10 ** (snr / 10) * N0, "k--", label="ground truth")
        ax.set_ylabel("average signal power")

        ax = axes[1, 0]
        ax.plot(snr, result.rho_ratio_db, "o-", label="blind estimate")
        ax.plot(snr, snr, "k--", label="ground truth")
        ax.set_ylabel("SNR [dB]")

        ax = axes[1, 1]
        ax.semilogy(snr, m["mse_blind"], "o-", label="blind SURE")
        ax.semilogy(snr, m["mse_sure"], "s:", label="SURE, known N0")
        ax.semilogy(snr, m["mse_true"], "k--", label="ground truth")
        ax.set_ylabel(f"MSE (lambda={result.config.lam:g})")

        for ax in axes.flat:
            ax.set_xlabel("true SNR [dB]")
            ax.grid(True, alpha=0.3)
            ax.legend()
        fig.tight_layout()
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
    return path


def write_manifest(path, command, config, outputs, **extra):
    manifest = {
        "command": command,
        "version": __version__,
        "seed": config.seed,
        "config": config.to_dict(),
        "outputs": [str(Path(p).name) for p in outputs],
    }
    manifest.update(extra)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path

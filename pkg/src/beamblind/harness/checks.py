"""Self-checks: SURE unbiasedness, runtime scaling, gamma calibration, lambda selection."""

import math
import time
from dataclasses import dataclass

import numpy as np

from ..beamspace import beamspace_power, naive_dft, sorted_power, to_beamspace
from ..channel import ArrayGeometry, draw_channel, make_snapshot, scale_to_snr, trial_seed
from ..denoisers import DEFAULT_LAMBDA_GRID, Denoiser, apply, divergence, sweep_lambda
from ..estimators import DEFAULT_GAMMA, estimate_noise_power, estimate_noise_power_batch, sure_terms
from .sweep import simulate_snapshots

# stream tags keep each check's random draws disjoint from the sweep's
UNBIASEDNESS_STREAM = 1_000_000
CALIBRATION_STREAM = 2_000_000
LAMBDA_STREAM = 3_000_000

UNBIASEDNESS_TOLERANCE = 0.02
SCALING_RATIO_LIMIT = 2.6
LAMBDA_HIT_RATE = 0.90


@dataclass
class UnbiasednessReport:
    snr_db: float
    denoiser: Denoiser
    trials: int
    sure_mean: float
    mse_mean: float
    rel_gap: float
    passed: bool

    def line(self):
        verdict = "PASS" if self.passed else "FAIL"
        return (
            f"{verdict} unbiasedness snr={self.snr_db:+.1f}dB {self.denoiser.kind.value}"
            f"(lam={self.denoiser.lam:g}) mean SURE={self.sure_mean:.6f} "
            f"empirical MSE={self.mse_mean:.6f} gap={100 * self.rel_gap:.3f}%"
        )


def run_unbiasedness_check(config, snr_db=3.0, denoiser=None, trials=None, tolerance=UNBIASEDNESS_TOLERANCE):
    """Mean SURE (true N0) vs empirical MSE over noise draws at one fixed channel.

    The denoiser (soft threshold at ``config.lam`` by default) acts in beamspace.
    """
    config.validate()
    denoiser = denoiser or Denoiser.soft_threshold(config.lam)
    trials = trials or config.trials
    geometry = ArrayGeometry(config.M, config.spacing)
    channel = draw_channel(geometry, config.L, np.random.default_rng(trial_seed(config.seed, UNBIASEDNESS_STREAM)))
    x = scale_to_snr(channel.h, 10 ** (snr_db / 10), config.N0)
    x_b = to_beamspace(x)

    noise_rng = np.random.default_rng(trial_seed(config.seed, UNBIASEDNESS_STREAM, 1))
    scale = math.sqrt(config.N0 / 2)
    n = scale * (noise_rng.standard_normal((trials, config.M)) + 1j * noise_rng.standard_normal((trials, config.M)))
    y_b = x_b + np.fft.fft(n, axis=1, norm="ortho")

    x_hat = apply(denoiser, y_b)
    residual, div_term = sure_terms(y_b, x_hat, divergence(denoiser, y_b), config.N0)
    sure = residual + config.N0 + div_term
    err = x_hat - x_b
    mse = np.sum(err.real**2 + err.imag**2, axis=1) / config.M

    sure_mean, mse_mean = float(np.mean(sure)), float(np.mean(mse))
    rel_gap = abs(sure_mean - mse_mean) / mse_mean
    return UnbiasednessReport(snr_db, denoiser, trials, sure_mean, mse_mean, rel_gap, rel_gap <= tolerance)


@dataclass
class BenchReport:
    M_list: list
    seconds: list
    ratios: list
    mean_ratio: float
    exponent: float
    oracle_max_diff: float
    passed: bool

    def lines(self):
        out = [f"M={M:5d}  {1e6 * s:9.2f} us/pipeline" for M, s in zip(self.M_list, self.seconds)]
        if self.ratios:
            verdict = "PASS" if self.passed else "FAIL"
            out.append(
                f"{verdict} scaling: mean doubling ratio {self.mean_ratio:.3f} "
                f"(limit {SCALING_RATIO_LIMIT}), fitted exponent {self.exponent:.3f}, "
                f"naive-DFT max |dN0| {self.oracle_max_diff:.2e}"
            )
        else:
            out.append("single size measured; no ratio")
        return out


def _pipeline(y, gamma):
    return estimate_noise_power(beamspace_power(y), gamma)


def run_scaling_bench(M_list, gamma=DEFAULT_GAMMA, inputs=32, repeats=5, seed=0):
    """Wall time of FFT + sort + split-and-average per snapshot, for each M.

    Inputs are noisy single-path snapshots at 10 dB.  Also checks that the
    pipeline gives the same estimate when the FFT is replaced by the naive DFT.
    """
    M_list = [int(M) for M in M_list]
    if any(M < 2 for M in M_list) or any(b <= a for a, b in zip(M_list, M_list[1:])):
        raise ValueError("M_list must be increasing with every M >= 2")
    seconds = []
    oracle_diff = 0.0
    for M in M_list:
        geometry = ArrayGeometry(M)
        snaps = [make_snapshot(geometry, 1, 10.0, 1.0, trial_seed(seed, M, k)).y for k in range(inputs)]
        best = math.inf
        for _ in range(repeats):
            t0 = time.perf_counter()
            for y in snaps:
                _pipeline(y, gamma)
            best = min(best, time.perf_counter() - t0)
        seconds.append(best / inputs)
        for y in snaps[:4]:
            fast = _pipeline(y, gamma)
            slow = estimate_noise_power(sorted_power(naive_dft(y)), gamma)
            oracle_diff = max(oracle_diff, abs(fast.n0_hat - slow.n0_hat))
            if fast.i_star != slow.i_star:
                oracle_diff = math.inf
    ratios = [b / a for a, b in zip(seconds, seconds[1:])]
    mean_ratio = float(np.mean(ratios)) if ratios else math.nan
    exponent = float(np.polyfit(np.log(M_list), np.log(seconds), 1)[0]) if len(M_list) > 1 else math.nan
    passed = (not ratios or mean_ratio <= SCALING_RATIO_LIMIT) and oracle_diff <= 1e-9
    return BenchReport(M_list, seconds, ratios, mean_ratio, exponent, oracle_diff, passed)


@dataclass
class GammaCalibration:
    gamma_grid: np.ndarray
    snr_points_db: list  # None marks the pure-noise point
    mean_n0: np.ndarray  # shape (len(gamma_grid), len(snr_points_db))
    objective: np.ndarray
    best_gamma: float

    def to_dict(self):
        return {
            "gamma_grid": [float(g) for g in self.gamma_grid],
            "snr_points_db": self.snr_points_db,
            "mean_n0": self.mean_n0.tolist(),
            "objective_mean_abs_bias_db": self.objective.tolist(),
            "best_gamma": self.best_gamma,
        }


def default_gamma_grid():
    return np.round(np.arange(1.0, 10.0 + 1e-9, 0.25), 10)


def calibrate_gamma(config, gamma_grid=None, trials=None):
    """Pick gamma minimizing the mean |bias| (in dB) of the noise estimate.

    The average runs over a pure-noise point plus every point of
    ``config.snr_grid_db``; ties go to the smaller gamma.  Every gamma is
    evaluated on the same snapshots.
    """
    config.validate()
    gamma_grid = default_gamma_grid() if gamma_grid is None else np.asarray(gamma_grid, dtype=float)
    trials = trials or config.trials
    cfg = type(config).from_dict({**config.to_dict(), "trials": trials})

    points = [None] + list(cfg.snr_grid_db)
    sorted_powers = []
    for k, snr_db in enumerate(points):
        ys, _ = simulate_snapshots(cfg, -math.inf if snr_db is None else snr_db, CALIBRATION_STREAM + k)
        yb = np.fft.fft(ys, axis=1, norm="ortho")
        sorted_powers.append(np.sort(yb.real**2 + yb.imag**2, axis=1))

    mean_n0 = np.array([[estimate_noise_power_batch(p, g)[0].mean() for p in sorted_powers] for g in gamma_grid])
    bias_db = np.abs(10 * np.log10(mean_n0 / cfg.N0))
    objective = bias_db.mean(axis=1)
    best = float(gamma_grid[int(np.argmin(objective))])
    return GammaCalibration(gamma_grid, points, mean_n0, objective, best)


@dataclass
class LambdaSelectionReport:
    snr_db: float
    seeds: int
    hit_rate: float
    blind_choices: np.ndarray
    oracle_choices: np.ndarray
    passed: bool

    def line(self):
        verdict = "PASS" if self.passed else "FAIL"
        return (
            f"{verdict} lambda selection snr={self.snr_db:+.1f}dB: blind choice within one grid step "
            f"of the true-MSE optimum in {100 * self.hit_rate:.1f}% of {self.seeds} seeds "
            f"(need {100 * LAMBDA_HIT_RATE:.0f}%)"
        )


def run_lambda_selection(config, snr_db=3.0, seeds=1000, grid=None):
    """Compare blind SURE-optimal lambda against the ground-truth-MSE optimum, per seed."""
    config.validate()
    grid = DEFAULT_LAMBDA_GRID if grid is None else np.asarray(grid, dtype=float)
    step = float(np.min(np.diff(grid))) if grid.size > 1 else 0.0
    geometry = ArrayGeometry(config.M, config.spacing)
    rho = 10 ** (snr_db / 10)
    blind, oracle = [], []
    for s in range(seeds):
        snap = make_snapshot(geometry, config.L, rho, config.N0, trial_seed(config.seed, LAMBDA_STREAM, s))
        y_b, x_b = to_beamspace(snap.y), to_beamspace(snap.x)
        noise = estimate_noise_power(sorted_power(y_b), config.gamma)
        blind.append(sweep_lambda(y_b, grid, noise).best_lambda)
        true_mse = [np.mean(np.abs(apply(Denoiser.soft_threshold(lam), y_b) - x_b) ** 2) for lam in grid]
        oracle.append(float(grid[int(np.argmin(true_mse))]))
    blind, oracle = np.array(blind), np.array(oracle)
    hit_rate = float(np.mean(np.abs(blind - oracle) <= step + 1e-12))
    return LambdaSelectionReport(snr_db, seeds, hit_rate, blind, oracle, hit_rate >= LAMBDA_HIT_RATE)

"""Regenerate tests/data/brackets.json from the default experiment config.

Each bracket is the observed mean +/- 5 standard errors.  Run once after an
intentional change to the estimators, review the diff, and commit it.

    python scripts/freeze_brackets.py
"""

import json
import math
from pathlib import Path

import numpy as np

from beamblind.harness.config import ExperimentConfig
from beamblind.harness.sweep import evaluate_trials, run_sweep, simulate_snapshots

OUT = Path(__file__).resolve().parent.parent / "tests" / "data" / "brackets.json"
WIDTH = 5.0
PURE_NOISE_STREAM = 4_000_000
SNR3_STREAM = 5_000_000


def bracket(values):
    values = np.asarray(values, dtype=float)
    mean = float(values.mean())
    half = WIDTH * float(values.std()) / math.sqrt(values.size)
    return {"mean": mean, "lo": mean - half, "hi": mean + half}


def main():
    cfg = ExperimentConfig()
    sweep = run_sweep(cfg, keep_trials=True)
    px = {repr(float(s)): bracket(p["px"]) for s, p in zip(cfg.snr_grid_db, sweep.per_trial)}

    ys, xs = simulate_snapshots(cfg, -math.inf, PURE_NOISE_STREAM)
    pure = evaluate_trials(ys, xs, cfg)

    ys, xs = simulate_snapshots(cfg, 3.0, SNR3_STREAM)
    at3 = evaluate_trials(ys, xs, cfg)
    px_m, n0_m = at3["px"].mean(), at3["n0"].mean()
    rho = px_m / n0_m
    rho_se = rho * float(np.std(at3["px"] / px_m - at3["n0"] / n0_m)) / math.sqrt(cfg.trials)

    data = {
        "config": cfg.to_dict(),
        "width_standard_errors": WIDTH,
        "px_by_snr_db": px,
        "pure_noise_n0": {"stream": PURE_NOISE_STREAM, **bracket(pure["n0"])},
        "rho_ratio_at_3db": {
            "stream": SNR3_STREAM,
            "mean": rho,
            "lo": rho - WIDTH * rho_se,
            "hi": rho + WIDTH * rho_se,
        },
    }
    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(json.dumps(data, indent=2) + "\n")
    print(f"wrote {OUT}")


if __name__ == "__main__":
    main()

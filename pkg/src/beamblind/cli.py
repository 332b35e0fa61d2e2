"""Command-line entry point: ``beamblind <subcommand> [options]``."""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .beamspace import ValidationError
from .denoisers import Denoiser
from .harness import checks
from .harness.config import ExperimentConfig
from .harness.sweep import emit_csv, emit_figure_csvs, emit_plot, emit_trials, run_sweep, write_manifest


def parse_grid(text):
    """``"a,b,c"`` or ``"start:stop:step"`` (stop inclusive) -> list of floats."""
    text = text.strip()
    if ":" in text:
        start, stop, step = (float(v) for v in text.split(":"))
        if step <= 0:
            raise argparse.ArgumentTypeError("grid step must be positive")
        return [float(v) for v in np.round(np.arange(start, stop + step / 2, step), 10)]
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _config_args(p):
    g = p.add_argument_group("experiment config (override --config)")
    g.add_argument("--config", type=Path, help="JSON file with config fields")
    g.add_argument("--M", type=int)
    g.add_argument("--L", type=int)
    g.add_argument("--N0", type=float)
    g.add_argument("--spacing", type=float)
    g.add_argument("--snr-grid", dest="snr_grid_db", type=parse_grid, help="dB values, 'a,b,c' or 'start:stop:step'")
    g.add_argument("--trials", type=int)
    g.add_argument("--gamma", type=float)
    g.add_argument("--lambda", dest="lam", type=float)
    g.add_argument("--seed", type=int)
    g.add_argument("--outputs", help="output directory")


def _load_config(args):
    overrides = {name: getattr(args, name, None) for name in ExperimentConfig.field_names()}
    return ExperimentConfig.load(args.config, **overrides)


def cmd_sweep(args):
    cfg = _load_config(args)
    out = Path(cfg.outputs)
    result = run_sweep(cfg, workers=args.workers, keep_trials=args.dump_trials)
    written = [emit_csv(result, out / "sweep.csv")]
    written += emit_figure_csvs(result, out)
    if not args.no_plot:
        written.append(emit_plot(result, out / "sweep.svg"))
    if args.dump_trials:
        written.append(emit_trials(result, out / "trials.csv"))
    write_manifest(out / "sweep_manifest.json", "sweep", cfg, written)
    print((out / "sweep.csv").read_text(), end="")
    return 0


def cmd_unbiasedness(args):
    cfg = _load_config(args)
    den = {
        "soft": Denoiser.soft_threshold(cfg.lam),
        "identity": Denoiser.identity(),
        "zero": Denoiser.zero(),
    }[args.denoiser]
    reports = [checks.run_unbiasedness_check(cfg, snr, den) for snr in args.snr]
    for r in reports:
        print(r.line())
    out = Path(cfg.outputs)
    path = out / "unbiasedness.json"
    out.mkdir(parents=True, exist_ok=True)
    path.write_text(
        json.dumps(
            [
                {
                    "snr_db": r.snr_db,
                    "denoiser": den.kind.value,
                    "lambda": den.lam,
                    "trials": r.trials,
                    "sure_mean": r.sure_mean,
                    "mse_mean": r.mse_mean,
                    "rel_gap": r.rel_gap,
                    "passed": r.passed,
                }
                for r in reports
            ],
            indent=2,
        )
        + "\n"
    )
    write_manifest(out / "unbiasedness_manifest.json", "unbiasedness", cfg, [path])
    return 0 if all(r.passed for r in reports) else 1


def cmd_bench(args):
    cfg = _load_config(args)
    report = checks.run_scaling_bench(args.sizes, gamma=cfg.gamma, seed=cfg.seed)
    for line in report.lines():
        print(line)
    return 0 if report.passed else 1


def cmd_calibrate_gamma(args):
    cfg = _load_config(args)
    cal = checks.calibrate_gamma(cfg, args.gamma_grid)
    for g, obj in zip(cal.gamma_grid, cal.objective):
        print(f"gamma={g:6.2f}  mean |bias| = {obj:.4f} dB")
    print(f"best gamma: {cal.best_gamma:g}")
    out = Path(cfg.outputs)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "gamma_calibration.json"
    path.write_text(json.dumps({"config": cfg.to_dict(), **cal.to_dict()}, indent=2) + "\n")
    write_manifest(out / "calibrate_gamma_manifest.json", "calibrate-gamma", cfg, [path])
    return 0


def cmd_lambda_select(args):
    cfg = _load_config(args)
    report = checks.run_lambda_selection(cfg, args.snr, args.seeds)
    print(report.line())
    return 0 if report.passed else 1


def build_parser():
    parser = argparse.ArgumentParser(prog="beamblind", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="Monte Carlo sweep over SNR; writes CSV, SVG and a manifest")
    _config_args(p)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--dump-trials", action="store_true", help="also write per-trial values")
    p.add_argument("--no-plot", action="store_true")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("unbiasedness", help="mean SURE vs empirical MSE at a fixed channel")
    _config_args(p)
    p.add_argument("--snr", type=parse_grid, default=[-3.0, 3.0, 10.0], help="SNR points in dB")
    p.add_argument("--denoiser", choices=["soft", "identity", "zero"], default="soft")
    p.set_defaults(func=cmd_unbiasedness)

    p = sub.add_parser("bench", help="runtime scaling of the noise estimation pipeline")
    _config_args(p)
    p.add_argument("--sizes", type=lambda s: [int(v) for v in parse_grid(s)], default=[64, 128, 256, 512, 1024])
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("calibrate-gamma", help="choose the threshold parameter gamma")
    _config_args(p)
    p.add_argument("--gamma-grid", type=parse_grid, default=None)
    p.set_defaults(func=cmd_calibrate_gamma)

    p = sub.add_parser("lambda-select", help="blind vs ground-truth choice of the soft threshold")
    _config_args(p)
    p.add_argument("--snr", type=float, default=3.0)
    p.add_argument("--seeds", type=int, default=1000)
    p.set_defaults(func=cmd_lambda_select)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())

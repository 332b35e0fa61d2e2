from .checks import calibrate_gamma, run_lambda_selection, run_scaling_bench, run_unbiasedness_check
from .config import ExperimentConfig
from .sweep import SweepResult, emit_csv, emit_figure_csvs, emit_plot, run_sweep

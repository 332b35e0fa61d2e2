"""Blind (pilot-free) noise power, SNR and MSE estimation for mmWave SIMO snapshots."""

__version__ = "0.1.0"

from .beamspace import (
    BeamspacePower,
    ValidationError,
    beamspace_power,
    from_beamspace,
    naive_dft,
    sorted_power,
    to_beamspace,
)
from .channel import ArrayGeometry, ChannelRealization, Snapshot, draw_channel, make_snapshot, steering_vector
from .estimators import (
    DEFAULT_GAMMA,
    MseEstimate,
    NoiseEstimate,
    SnrEstimate,
    blind_snr,
    estimate_mse_blind,
    estimate_noise_power,
    estimate_signal_power,
    estimate_snr,
    sure_with_known_noise,
)
from .denoisers import Denoiser, DenoiserKind, LambdaSweep, apply, divergence, sweep_lambda

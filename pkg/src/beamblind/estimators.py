"""Blind estimators of noise power, signal power, SNR and denoiser MSE.

Everything here works from a single received snapshot ``y``; no pilots and
no ground-truth signal are used.  The noise power estimate splits the
ascending beamspace power sequence at the first large jump: the beams below
the jump are treated as noise-only and averaged.
"""

import math
from dataclasses import dataclass

import numpy as np

from .beamspace import BeamspacePower, ValidationError, as_complex_vector, beamspace_power

# Chosen by `beamblind calibrate-gamma` with its default settings; the
# full record lives in calibration/gamma_calibration.json.
DEFAULT_GAMMA = 3.25


@dataclass(frozen=True)
class NoiseEstimate:
    n0_hat: float
    i_star: int  # number of sorted beams classified as noise, 1..M
    gamma: float
    M: int


@dataclass(frozen=True)
class SnrEstimate:
    noise: NoiseEstimate
    p_x_hat: float
    rho_hat: float

    @property
    def is_infinite(self):
        return math.isinf(self.rho_hat)

    @property
    def is_undefined(self):
        return math.isnan(self.rho_hat)

    @property
    def rho_hat_db(self):
        if self.is_undefined:
            return math.nan
        if self.rho_hat == 0:
            return -math.inf
        return 10 * math.log10(self.rho_hat)


@dataclass(frozen=True)
class MseEstimate:
    """SURE-type MSE estimate, ``mse_hat = residual_term + n0 + divergence_term``."""

    mse_hat: float
    residual_term: float
    divergence_term: float
    n0: float


def _check_gamma(gamma):
    if not (np.isfinite(gamma) and gamma > 0):
        raise ValidationError(f"gamma must be positive, got {gamma}")


def estimate_noise_power(p_sorted, gamma=DEFAULT_GAMMA):
    """Average noise power from an ascending power sequence.

    Walks i = 1..M-1 keeping the running mean of the first i powers and stops
    at the first i whose forward difference ``p[i+1] - p[i]`` is at least
    ``gamma`` times that mean.  The estimate is the mean of those first i
    powers.  If nothing triggers, all M powers are averaged.

    ``p_sorted`` is a :class:`BeamspacePower` or an ascending 1-D array.
    """
    _check_gamma(gamma)
    p = p_sorted.sorted_power if isinstance(p_sorted, BeamspacePower) else np.asarray(p_sorted, dtype=float)
    if p.ndim != 1:
        raise ValidationError("power sequence must be one-dimensional")
    M = p.size
    if M < 2:
        raise ValidationError(f"need at least two beams, got M={M}")
    if not np.all(np.isfinite(p)) or np.any(p < 0):
        raise ValidationError("power sequence must be finite and nonnegative")
    if np.any(np.diff(p) < 0):
        raise ValidationError("power sequence must be sorted ascending")
    if p[-1] == 0:
        return NoiseEstimate(n0_hat=0.0, i_star=M, gamma=float(gamma), M=M)

    vals = p.tolist()
    avg = 0.0
    for i in range(1, M):
        avg = (avg * (i - 1) + vals[i - 1]) / i
        if vals[i] - vals[i - 1] >= gamma * avg:
            return NoiseEstimate(n0_hat=avg, i_star=i, gamma=float(gamma), M=M)
    avg = (avg * (M - 1) + vals[M - 1]) / M
    return NoiseEstimate(n0_hat=avg, i_star=M, gamma=float(gamma), M=M)


def estimate_noise_power_batch(p_sorted, gamma=DEFAULT_GAMMA):
    """Vectorized :func:`estimate_noise_power` over the rows of a 2-D array.

    Returns ``(n0_hat, i_star)`` arrays.  The running mean is taken from a
    cumulative sum, so values agree with the scalar loop to rounding.
    """
    _check_gamma(gamma)
    p = np.asarray(p_sorted, dtype=float)
    if p.ndim != 2 or p.shape[1] < 2:
        raise ValidationError("expected shape (trials, M) with M >= 2")
    T, M = p.shape
    running_mean = np.cumsum(p, axis=1) / np.arange(1, M + 1)
    fired = np.diff(p, axis=1) >= gamma * running_mean[:, :-1]
    any_fired = fired.any(axis=1)
    i_star = np.where(any_fired, fired.argmax(axis=1) + 1, M)
    all_zero = p[:, -1] == 0
    i_star[all_zero] = M
    n0_hat = running_mean[np.arange(T), i_star - 1]
    return n0_hat, i_star


def estimate_signal_power(y, noise):
    """``max(||y||**2 - M*n0_hat, 0) / M``."""
    y = as_complex_vector(y)
    M = y.size
    energy = float(np.vdot(y, y).real)
    return max(energy - M * noise.n0_hat, 0.0) / M


def estimate_snr(p_x_hat, noise):
    """Ratio of estimated signal power to estimated noise power.

    With ``n0_hat == 0`` the ratio has no finite value: ``inf`` is returned
    when ``p_x_hat > 0`` and ``nan`` (undefined) when both are zero.
    """
    n0 = noise.n0_hat if isinstance(noise, NoiseEstimate) else float(noise)
    if n0 < 0 or p_x_hat < 0:
        raise ValidationError("powers must be nonnegative")
    if n0 == 0:
        return math.inf if p_x_hat > 0 else math.nan
    return p_x_hat / n0


def blind_snr(y, gamma=DEFAULT_GAMMA):
    """Full pipeline on one snapshot: beamspace, sort, noise, signal, SNR."""
    y = as_complex_vector(y)
    noise = estimate_noise_power(beamspace_power(y), gamma)
    p_x = estimate_signal_power(y, noise)
    return SnrEstimate(noise=noise, p_x_hat=p_x, rho_hat=estimate_snr(p_x, noise))


def sure_terms(y, x_hat, div_sum, n0):
    """Residual and divergence terms of the SURE expression.

    Broadcasts over leading axes; the last axis indexes the M elements.
    ``div_sum`` is the summed per-element divergence of the denoiser.
    """
    y = np.asarray(y)
    M = y.shape[-1]
    diff = np.asarray(x_hat) - y
    residual = np.sum(diff.real**2 + diff.imag**2, axis=-1) / M
    divergence = np.asarray(n0) * (np.asarray(div_sum) - 2 * M) / M
    return residual, divergence


def _sure(y, denoiser, n0):
    from .denoisers import apply, divergence

    y = as_complex_vector(y)
    residual, div_term = sure_terms(y, apply(denoiser, y), divergence(denoiser, y), n0)
    residual, div_term = float(residual), float(div_term)
    return MseEstimate(mse_hat=residual + n0 + div_term, residual_term=residual, divergence_term=div_term, n0=float(n0))


def estimate_mse_blind(y, denoiser, noise):
    """MSE of ``denoiser`` on ``y`` via SURE with the blind noise estimate plugged in.

    The result is unclamped and can be negative for an individual snapshot.
    """
    return _sure(y, denoiser, noise.n0_hat)


def sure_with_known_noise(y, denoiser, n0_true):
    """Same as :func:`estimate_mse_blind` but with the true noise power."""
    if not n0_true >= 0:
        raise ValidationError("n0_true must be nonnegative")
    return _sure(y, denoiser, float(n0_true))

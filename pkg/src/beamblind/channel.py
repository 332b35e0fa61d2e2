"""Synthetic narrowband mmWave SIMO snapshots from a few-path ULA channel.

A channel is a sum of L plane waves, ``h = sum_l g_l * a(phi_l)``, with
complex Gaussian gains and spatial frequencies uniform on [-1, 1] (off the
DFT grid).  Snapshots are scaled per realization so that the noiseless
signal has exactly the requested SNR.
"""

from dataclasses import dataclass, field

import numpy as np

from .beamspace import ValidationError


@dataclass(frozen=True)
class ArrayGeometry:
    M: int = 64
    spacing: float = 0.5  # wavelengths

    def __post_init__(self):
        if int(self.M) != self.M or self.M < 1:
            raise ValidationError(f"M must be a positive integer, got {self.M}")
        if not self.spacing > 0:
            raise ValidationError(f"spacing must be positive, got {self.spacing}")


@dataclass(frozen=True)
class ChannelRealization:
    h: np.ndarray
    gains: np.ndarray
    spatial_freqs: np.ndarray

    @property
    def L(self):
        return self.gains.size

    @property
    def paths(self):
        return list(zip(self.gains.tolist(), self.spatial_freqs.tolist()))


@dataclass(frozen=True)
class Snapshot:
    y: np.ndarray
    x: np.ndarray
    N0_true: float
    rho_true: float
    seed: object = field(default=None, compare=False)

    @property
    def M(self):
        return self.y.size

    @property
    def noise(self):
        return self.y - self.x


def trial_seed(seed, *indices):
    """Per-trial seed sequence mixed from a master seed and trial coordinates.

    The mixing is numpy's ``SeedSequence`` hash over ``(seed, *indices)``,
    e.g. ``trial_seed(seed, snr_index, trial_index)``.  Results depend only
    on these integers, never on worker count or scheduling.
    """
    return np.random.SeedSequence([int(seed), *(int(i) for i in indices)])


def _rng(rng_seed):
    if isinstance(rng_seed, np.random.Generator):
        return rng_seed
    return np.random.default_rng(rng_seed)


def steering_vectors(geometry, phis):
    """Stack of steering vectors, shape ``(len(phis), M)``."""
    phis = np.atleast_1d(np.asarray(phis, dtype=float))
    if np.any(~np.isfinite(phis)) or np.any(np.abs(phis) > 1):
        raise ValidationError("spatial frequency must lie in [-1, 1]")
    m = np.arange(geometry.M)
    return np.exp(2j * np.pi * geometry.spacing * np.outer(phis, m))


def steering_vector(geometry, phi):
    """ULA response ``exp(j*2*pi*spacing*m*phi)`` for m = 0..M-1."""
    return steering_vectors(geometry, [phi])[0]


def complex_gaussian(rng, shape, variance=1.0):
    """Circularly-symmetric complex Gaussian samples with E|z|^2 = variance."""
    scale = np.sqrt(variance / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def draw_channel(geometry, L=3, rng_seed=None, *, gains=None, spatial_freqs=None):
    """Draw an L-path channel.

    ``gains`` / ``spatial_freqs`` override the random draws (used to pin a
    known channel in tests); anything not overridden is drawn from the seed.
    """
    if int(L) != L or L < 1:
        raise ValidationError(f"L must be a positive integer, got {L}")
    rng = _rng(rng_seed)
    g = complex_gaussian(rng, L) if gains is None else np.asarray(gains, dtype=np.complex128)
    phi = rng.uniform(-1.0, 1.0, L) if spatial_freqs is None else np.asarray(spatial_freqs, dtype=float)
    if g.shape != (L,) or phi.shape != (L,):
        raise ValidationError("gains and spatial_freqs must have length L")
    h = g @ steering_vectors(geometry, phi)
    return ChannelRealization(h=h, gains=g, spatial_freqs=phi)


def scale_to_snr(h, rho, N0):
    """Rescale ``h`` so that ``||x||**2 == M * rho * N0``."""
    M = h.size
    if rho == 0:
        return np.zeros(M, dtype=np.complex128)
    energy = np.vdot(h, h).real
    if energy == 0:
        raise ValidationError("cannot scale an all-zero channel to a positive SNR")
    return h * np.sqrt(M * rho * N0 / energy)


def observe(x, N0, rng_seed=None):
    """Add complex AWGN of per-element variance ``N0`` to ``x``."""
    if not N0 > 0:
        raise ValidationError(f"N0 must be positive, got {N0}")
    x = np.asarray(x, dtype=np.complex128)
    return x + complex_gaussian(_rng(rng_seed), x.shape, N0)


def make_snapshot(geometry, L=3, rho_target=1.0, N0=1.0, rng_seed=None):
    """Draw a channel, calibrate it to ``rho_target`` and add noise.

    The transmit symbol is fixed to 1, so ``x`` is the scaled channel.
    The same generator draws the channel first and the noise second.
    """
    if not (np.isfinite(rho_target) and rho_target >= 0):
        raise ValidationError(f"rho_target must be >= 0, got {rho_target}")
    if not (np.isfinite(N0) and N0 > 0):
        raise ValidationError(f"N0 must be positive, got {N0}")
    rng = _rng(rng_seed)
    channel = draw_channel(geometry, L, rng)
    x = scale_to_snr(channel.h, rho_target, N0)
    y = observe(x, N0, rng)
    return Snapshot(y=y, x=x, N0_true=float(N0), rho_true=float(rho_target), seed=rng_seed)


def gini(power):
    """Gini coefficient of a nonnegative vector (0 = flat, -> 1 = one spike)."""
    p = np.sort(np.asarray(power, dtype=float))
    n = p.size
    total = p.sum()
    if total == 0:
        return 0.0
    ranks = np.arange(1, n + 1)
    return float(np.sum((2 * ranks - n - 1) * p) / (n * total))

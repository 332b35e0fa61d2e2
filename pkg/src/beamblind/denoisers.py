"""Element-wise shrinkage denoisers and their SURE divergence.

The complex soft threshold is the closed-form LASSO solution
``argmin_x 0.5*||y - x||^2 + lam*||x||_1``: each element's magnitude is
shrunk by ``lam`` and elements with ``|y_m| <= lam`` are zeroed.

Divergence of the soft threshold, per element with r = |y_m| > lam:
writing the map as ``y * (1 - lam/r)``, the Jacobian w.r.t. (Re y, Im y)
has trace ``2 - lam/r``.  Below the threshold the map is identically zero.
The boundary r == lam is assigned to the zero branch.
"""

import enum
from dataclasses import dataclass

import numpy as np

from .beamspace import ValidationError
from .estimators import NoiseEstimate, estimate_mse_blind

DEFAULT_LAMBDA_GRID = np.arange(0.0, 6.0 + 1e-9, 0.25)


class DenoiserKind(enum.Enum):
    SOFT_THRESHOLD = "soft_threshold"
    IDENTITY = "identity"
    ZERO = "zero"


@dataclass(frozen=True)
class Denoiser:
    kind: DenoiserKind = DenoiserKind.SOFT_THRESHOLD
    lam: float = 0.0

    def __post_init__(self):
        if not (np.isfinite(self.lam) and self.lam >= 0):
            raise ValidationError(f"lambda must be >= 0, got {self.lam}")

    @classmethod
    def soft_threshold(cls, lam):
        return cls(DenoiserKind.SOFT_THRESHOLD, float(lam))

    @classmethod
    def identity(cls):
        return cls(DenoiserKind.IDENTITY)

    @classmethod
    def zero(cls):
        return cls(DenoiserKind.ZERO)

    def __call__(self, y):
        return apply(self, y)


def apply(denoiser, y):
    """Denoise ``y`` element-wise.  Any array shape is accepted."""
    y = np.asarray(y, dtype=np.complex128)
    if denoiser.kind is DenoiserKind.IDENTITY:
        return y.copy()
    if denoiser.kind is DenoiserKind.ZERO:
        return np.zeros_like(y)
    r = np.abs(y)
    keep = r > denoiser.lam
    gain = np.zeros(y.shape)
    gain[keep] = (r[keep] - denoiser.lam) / r[keep]
    return gain * y


def elementwise_divergence(denoiser, y):
    """``dRe(xhat_m)/dRe(y_m) + dIm(xhat_m)/dIm(y_m)`` for each element."""
    y = np.asarray(y, dtype=np.complex128)
    if denoiser.kind is DenoiserKind.IDENTITY:
        return np.full(y.shape, 2.0)
    if denoiser.kind is DenoiserKind.ZERO:
        return np.zeros(y.shape)
    r = np.abs(y)
    keep = r > denoiser.lam
    d = np.zeros(y.shape)
    d[keep] = 2.0 - denoiser.lam / r[keep]
    return d


def divergence(denoiser, y):
    """Summed divergence over the last axis (a float for 1-D input)."""
    d = elementwise_divergence(denoiser, y).sum(axis=-1)
    return float(d) if np.ndim(d) == 0 else d


def finite_difference_divergence(denoiser, y, step=1e-6):
    """Central-difference estimate of :func:`elementwise_divergence`.

    Perturbs the real and imaginary part of each element separately.
    Independent of the closed form; kept as a permanent cross-check.
    """
    y = np.asarray(y, dtype=np.complex128)
    fwd_re = apply(denoiser, y + step).real
    bwd_re = apply(denoiser, y - step).real
    fwd_im = apply(denoiser, y + 1j * step).imag
    bwd_im = apply(denoiser, y - 1j * step).imag
    return (fwd_re - bwd_re + fwd_im - bwd_im) / (2 * step)


@dataclass(frozen=True)
class LambdaSweep:
    grid: np.ndarray
    estimated_mse: np.ndarray
    best_lambda: float

    @property
    def best_mse(self):
        return float(self.estimated_mse[np.searchsorted(self.grid, self.best_lambda)])


def check_lambda_grid(grid):
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise ValidationError("lambda grid must be a nonempty 1-D sequence")
    if np.any(~np.isfinite(grid)) or np.any(grid < 0):
        raise ValidationError("lambda grid values must be finite and >= 0")
    if np.any(np.diff(grid) <= 0):
        raise ValidationError("lambda grid must be strictly increasing")
    return grid


def sweep_lambda(y, grid, noise: NoiseEstimate):
    """Blind MSE estimate of the soft threshold at each grid value.

    ``best_lambda`` minimizes the estimate; ties go to the smaller lambda
    (argmin returns the first minimum of an increasing grid).
    """
    grid = check_lambda_grid(grid)
    mse = np.array([estimate_mse_blind(y, Denoiser.soft_threshold(lam), noise).mse_hat for lam in grid])
    return LambdaSweep(grid=grid, estimated_mse=mse, best_lambda=float(grid[np.argmin(mse)]))

"""Antenna-domain to beamspace transform and power-sequence helpers."""

from dataclasses import dataclass

import numpy as np


class ValidationError(ValueError):
    """Raised when an input violates a precondition."""


def as_complex_vector(y, name="y"):
    """Return ``y`` as a 1-D complex128 array, rejecting empty or non-finite input."""
    arr = np.asarray(y, dtype=np.complex128)
    if arr.ndim != 1:
        raise ValidationError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if arr.size < 1:
        raise ValidationError(f"{name} must have at least one element")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contains NaN or Inf")
    return arr


def to_beamspace(y):
    """Unitary DFT across the antenna axis.

    Uses symmetric 1/sqrt(M) scaling, so ``||to_beamspace(y)||**2 == ||y||**2``.
    Works for any M (numpy's FFT handles non power-of-two lengths).
    """
    y = as_complex_vector(y)
    return np.fft.fft(y, norm="ortho")


def from_beamspace(y_b):
    """Inverse of :func:`to_beamspace`."""
    y_b = as_complex_vector(y_b, "y_b")
    return np.fft.ifft(y_b, norm="ortho")


def naive_dft(y):
    """Direct O(M^2) unitary DFT via an explicit DFT matrix.

    Test oracle for :func:`to_beamspace`; shares no code with the FFT path.
    """
    y = as_complex_vector(y)
    M = y.size
    km = np.outer(np.arange(M), np.arange(M)) % M  # exact integer phase index
    F = np.exp(-2j * np.pi * km / M) / np.sqrt(M)
    return F @ y


@dataclass(frozen=True)
class BeamspacePower:
    """Ascending element-wise power of a beamspace vector.

    ``permutation[i]`` is the beam index whose power sits at ``sorted_power[i]``.
    """

    sorted_power: np.ndarray
    permutation: np.ndarray

    def __post_init__(self):
        self.sorted_power.setflags(write=False)
        self.permutation.setflags(write=False)

    @property
    def M(self):
        return self.sorted_power.size

    @property
    def total(self):
        return float(np.sum(self.sorted_power))


def sorted_power(y_b):
    """Sort ``|y_b|**2`` ascending; ties keep the original beam order."""
    y_b = as_complex_vector(y_b, "y_b")
    power = y_b.real**2 + y_b.imag**2
    perm = np.argsort(power, kind="stable")
    return BeamspacePower(sorted_power=power[perm], permutation=perm)


def beamspace_power(y):
    """Shortcut: :func:`to_beamspace` followed by :func:`sorted_power`."""
    return sorted_power(to_beamspace(y))

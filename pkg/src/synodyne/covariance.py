"""Output-field covariance matrix and homodyne spectral densities.

The covariance at frequency ``omega`` is the symmetrized correlator of the
amplitude (index 1) and phase (index 2) quadratures of the cavity output,
with the transform convention ``x(omega) = int x(t) exp(-i omega t) dt`` and
``c12 = <x1(omega) x2(omega)^*>``.  Vacuum is 1/2 in each quadrature.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import SystemParams, responses


@dataclass(frozen=True)
class CovarianceMatrix:
    """Hermitian 2x2 covariance ``[[c11, c12], [conj(c12), c22]]``.

    Fields may be scalars or equally shaped arrays (one matrix per frequency).
    """

    omega: float | np.ndarray
    c11: float | np.ndarray
    c12: complex | np.ndarray
    c22: float | np.ndarray

    def as_array(self) -> np.ndarray:
        """Stack into an array of shape ``(..., 2, 2)``."""
        c11 = np.asarray(self.c11, dtype=complex)
        c12 = np.asarray(self.c12, dtype=complex)
        c22 = np.asarray(self.c22, dtype=complex)
        top = np.stack([c11, c12], axis=-1)
        bottom = np.stack([np.conj(c12), c22], axis=-1)
        return np.stack([top, bottom], axis=-2)


def covariance_at(params: SystemParams, omega) -> CovarianceMatrix:
    """Covariance matrix of the output quadratures at ``omega``.

    The amplitude quadrature leaves the cavity as undisturbed vacuum; the phase
    quadrature carries vacuum, back-action and transduced thermal noise::

        c11 = 1/2
        c12 = conj(chi_ba) / 2
        c22 = 1/2 + |chi_ba|**2 / 2 + (nbar + 1/2) (|t_q|**2 + |t_p|**2)
    """
    r = responses(params, omega)
    c12 = np.conj(r.chi_ba) / 2
    thermal = (params.nbar + 0.5) * (np.abs(r.t_q) ** 2 + np.abs(r.t_p) ** 2)
    c22 = 0.5 + np.abs(r.chi_ba) ** 2 / 2 + thermal
    if np.ndim(c22) == 0:
        return CovarianceMatrix(r.omega, 0.5, complex(c12), float(c22))
    return CovarianceMatrix(r.omega, np.full(c22.shape, 0.5), c12, c22)


def _half_gap(c11, c22, cross):
    return np.hypot((c22 - c11) / 2, cross)


def eigenvalues(cov: CovarianceMatrix):
    """Eigenvalues ``(c_minus, c_plus)`` of the Hermitian covariance, ``c_minus <= c_plus``."""
    mean = (cov.c11 + cov.c22) / 2
    gap = _half_gap(cov.c11, cov.c22, np.abs(cov.c12))
    return mean - gap, mean + gap


def homodyne_psd(cov: CovarianceMatrix, theta):
    """Spectral density of a homodyne detector at quadrature angle ``theta``."""
    c, s = np.cos(theta), np.sin(theta)
    return c**2 * cov.c11 + s**2 * cov.c22 + 2 * s * c * np.real(cov.c12)


def min_homodyne(cov: CovarianceMatrix):
    """Best homodyne angle and the noise it achieves.

    Returns ``(theta_star, value)`` with ``theta_star`` in ``[0, pi)``.  Only the
    real part of ``c12`` can be exploited.  A degenerate matrix (no preferred
    angle) yields ``theta_star = 0``.
    """
    re12 = np.real(cov.c12)
    diff = (np.asarray(cov.c22) - np.asarray(cov.c11)) / 2
    gap = _half_gap(cov.c11, cov.c22, re12)
    value = (cov.c11 + cov.c22) / 2 - gap
    theta = np.mod(0.5 * np.arctan2(-re12, diff), np.pi)
    theta = np.where(gap == 0, 0.0, theta)
    # pi itself can appear from rounding of the mod; fold it back to 0
    theta = np.where(theta >= np.pi, 0.0, theta)
    if np.ndim(theta) == 0:
        return float(theta), float(value)
    return theta, value

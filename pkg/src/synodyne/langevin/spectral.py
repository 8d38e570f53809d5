"""Welch spectral estimation and time-weighted quadrature projections.

Spectra are two-sided densities in angular frequency,
``S(omega) = int <x(t) x(0)> exp(-i omega t) dt``, so white noise of per-sample
variance ``s / dt`` has density ``s`` and vacuum comes out at 1/2.  Only the
non-negative frequency bins are returned; for real records ``S(-omega)`` is the
complex conjugate.  Cross spectra follow ``S_ij = <x_i(omega) x_j(omega)^*>``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import fft as sp_fft
from scipy.signal import get_window

from ..errors import InvalidInputError


@dataclass(frozen=True)
class Spectrum:
    omega: np.ndarray
    psd: np.ndarray
    stderr: np.ndarray
    n_segments: int
    n_effective: float


@dataclass(frozen=True)
class CrossSpectrum:
    """Spectral matrix ``matrix[k, i, j]`` at ``omega[k]`` with per-entry standard errors."""

    omega: np.ndarray
    matrix: np.ndarray
    n_segments: int
    n_effective: float
    nyquist: float

    def stderr_auto(self, i: int) -> np.ndarray:
        s = self.matrix[:, i, i].real
        return s * np.sqrt(_dof_factor(self.omega, self.nyquist)) / math.sqrt(self.n_effective)

    def stderr_cross(self, i: int, j: int):
        """Standard errors of the real and imaginary parts of ``matrix[:, i, j]``."""
        sii = self.matrix[:, i, i].real
        sjj = self.matrix[:, j, j].real
        c = self.matrix[:, i, j]
        k = self.n_effective
        var_re = 0.5 * (sii * sjj + c.real**2 - c.imag**2) / k
        var_im = 0.5 * (sii * sjj - c.real**2 + c.imag**2) / k
        return np.sqrt(np.clip(var_re, 0, None)), np.sqrt(np.clip(var_im, 0, None))


def _dof_factor(omega, nyquist):
    # dc and Nyquist periodogram bins of a real record are chi-square with one dof
    edge = (omega == 0) | (omega == nyquist)
    return np.where(edge, 2.0, 1.0)


def effective_segments(window: np.ndarray, step: int, n_segments: int) -> float:
    """Equivalent number of independent segments of an overlapped Welch average."""
    norm = float(np.sum(window**2))
    total = 1.0
    for j in range(1, n_segments):
        shift = j * step
        if shift >= len(window):
            break
        rho = float(np.dot(window[:-shift], window[shift:])) / norm
        total += 2 * (1 - j / n_segments) * rho**2
    return n_segments / total


class WelchAccumulator:
    """Streaming Welch estimator of the cross-spectral matrix of several channels.

    Feed blocks of shape ``(n_samples, n_channels)`` with :meth:`feed` in time
    order; any block boundaries give the same result.  With ``bins`` given,
    only those rfft bin indices are evaluated by direct projection, which is
    cheaper than a full FFT when a handful of bins is needed.
    """

    def __init__(self, n_channels: int, segment_length: int, dt: float,
                 overlap_fraction: float = 0.5, window: str = "hann", bins=None):
        if segment_length < 2:
            raise InvalidInputError("segment_length must be at least 2")
        if not 0 <= overlap_fraction <= 0.9:
            raise InvalidInputError(f"overlap_fraction must lie in [0, 0.9], got {overlap_fraction!r}")
        self.n_channels = n_channels
        self.segment_length = int(segment_length)
        self.dt = float(dt)
        self.step = max(1, self.segment_length - int(round(overlap_fraction * self.segment_length)))
        self.window = get_window(window, self.segment_length)
        self._scale = self.dt / float(np.sum(self.window**2))
        n_rfft = self.segment_length // 2 + 1
        self.bins = np.arange(n_rfft) if bins is None else np.asarray(bins, dtype=int)
        if self.bins.size == 0 or self.bins.min() < 0 or self.bins.max() >= n_rfft:
            raise InvalidInputError("bins outside the rfft range")
        self._direct = bins is not None
        if self._direct:
            n = np.arange(self.segment_length)
            self._kernels = self.window[:, None] * np.exp(
                -2j * np.pi * np.outer(n, self.bins) / self.segment_length)
        self._buffer = np.empty((0, n_channels))
        self._sum = np.zeros((self.bins.size, n_channels, n_channels), dtype=complex)
        self.n_segments = 0

    def feed(self, block) -> None:
        block = np.asarray(block, dtype=float)
        if block.ndim == 1:
            block = block[:, None]
        if block.shape[1] != self.n_channels:
            raise InvalidInputError(f"expected {self.n_channels} channels, got {block.shape[1]}")
        buf = np.concatenate([self._buffer, block]) if len(self._buffer) else block
        start = 0
        while start + self.segment_length <= len(buf):
            self._add(buf[start:start + self.segment_length])
            start += self.step
        self._buffer = buf[start:].copy()

    def _add(self, seg) -> None:
        if self._direct:
            spec = self._kernels.T @ seg
        else:
            spec = sp_fft.rfft(seg * self.window[:, None], axis=0)
        self._sum += spec[:, :, None] * np.conj(spec[:, None, :])
        self.n_segments += 1

    def result(self) -> CrossSpectrum:
        if self.n_segments == 0:
            raise InvalidInputError("record shorter than one segment")
        omega = 2 * np.pi * self.bins / (self.segment_length * self.dt)
        matrix = self._sum * (self._scale / self.n_segments)
        k_eff = effective_segments(self.window, self.step, self.n_segments)
        nyquist = 2 * np.pi * (self.segment_length // 2) / (self.segment_length * self.dt)
        return CrossSpectrum(omega, matrix, self.n_segments, k_eff, nyquist)


def cross_spectrum(records, dt: float, segment_length: int, overlap_fraction: float = 0.5) -> CrossSpectrum:
    """Welch cross-spectral matrix of equally long records (list of 1-D arrays)."""
    data = np.column_stack([np.asarray(r, dtype=float) for r in records])
    if len(data) < segment_length:
        raise InvalidInputError(f"record of {len(data)} samples is shorter than segment_length {segment_length}")
    acc = WelchAccumulator(data.shape[1], segment_length, dt, overlap_fraction)
    acc.feed(data)
    return acc.result()


def psd_welch(record, dt: float, segment_length: int, overlap_fraction: float = 0.5) -> Spectrum:
    """Welch power spectral density of one real record with per-bin standard errors."""
    cs = cross_spectrum([record], dt, segment_length, overlap_fraction)
    psd = cs.matrix[:, 0, 0].real
    return Spectrum(cs.omega, psd, cs.stderr_auto(0), cs.n_segments, cs.n_effective)


def temporal_phase_components(record, dt: float, omega: float, xi_grid, t0: float = 0.0) -> np.ndarray:
    """Projections ``int x(t) cos(omega t - xi) dt`` of a record for each temporal phase ``xi``."""
    x = np.asarray(record, dtype=float)
    duration = len(x) * dt
    if omega <= 0 or duration * omega < 200 * math.pi:
        raise InvalidInputError("record must span at least 100 cycles of omega")
    t = t0 + dt * np.arange(len(x))
    xi = np.atleast_1d(np.asarray(xi_grid, dtype=float))
    c = dt * np.dot(x, np.cos(omega * t))
    s = dt * np.dot(x, np.sin(omega * t))
    # cos(wt - xi) = cos(wt) cos(xi) + sin(wt) sin(xi)
    return c * np.cos(xi) + s * np.sin(xi)

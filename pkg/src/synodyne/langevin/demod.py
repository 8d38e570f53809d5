"""Two-tone (synodyne) demodulation of simulated output records."""

from __future__ import annotations

import math

import numpy as np
from numba import njit

from ..detection import LoTones, lo_quadratures
from ..errors import InvalidInputError
from .simulate import TimeSeries
from .statespace import OUTPUT_NAMES

XI = "xi"


def synodyne_record(x_am, x_pm, times, tones: LoTones, time_shift: float = 0.0) -> np.ndarray:
    """``(Re(alpha) x_am + Im(alpha) x_pm) / sqrt(I)`` with the LO evaluated at ``times + time_shift``.

    Dividing by ``sqrt(I)`` makes the vacuum dc density 1/2, and in general the
    dc density equals :func:`synodyne.detection.synodyne_psd_dc` for the spinor
    of ``tones`` when ``omega_s`` sits at the analysed frequency.
    """
    re, im = lo_quadratures(tones, np.asarray(times) + time_shift)
    return (re * x_am + im * x_pm) / math.sqrt(tones.intensity)


@njit(cache=True, nogil=True)
def _pair_kernel(x_am, x_pm, times, omega, coef, first, second):
    am_c, am_s, pm_c, pm_s = coef[0], coef[1], coef[2], coef[3]
    for k in range(x_am.shape[0]):
        c = math.cos(omega * times[k])
        s = math.sin(omega * times[k])
        first[k] = (am_c * c + am_s * s) * x_am[k] + (pm_c * c + pm_s * s) * x_pm[k]
        second[k] = (am_s * c - am_c * s) * x_am[k] + (pm_s * c - pm_c * s) * x_pm[k]


def synodyne_pair(x_am, x_pm, times, tones: LoTones):
    """Synodyne records for the LO at ``times`` and at ``times`` plus a quarter LO period."""
    x_am = np.ascontiguousarray(x_am, dtype=float)
    x_pm = np.ascontiguousarray(x_pm, dtype=float)
    times = np.ascontiguousarray(times, dtype=float)
    if not len(x_am) == len(x_pm) == len(times):
        raise InvalidInputError("records and times have different lengths")
    total = complex(tones.alpha_plus) + complex(tones.alpha_minus)
    diff = complex(tones.alpha_plus) - complex(tones.alpha_minus)
    norm = math.sqrt(tones.intensity)
    # advancing the LO by a quarter period maps (cos, sin) -> (-sin, cos)
    coef = np.array([total.real, -diff.imag, total.imag, diff.real]) / norm
    first = np.empty_like(x_am)
    second = np.empty_like(x_am)
    _pair_kernel(x_am, x_pm, times, float(tones.omega_s), coef, first, second)
    return first, second


def demodulate_synodyne(ts: TimeSeries, tones: LoTones, time_shift: float = 0.0) -> TimeSeries:
    """Return a copy of ``ts`` with the synodyne photocurrent added as channel ``"xi"``.

    Shifting the LO in time by ``tau`` multiplies ``alpha_am`` by
    ``exp(i omega_s tau)`` and ``alpha_pm`` by ``exp(-i omega_s tau)``, which
    leaves the dc noise unchanged.  At a quarter LO period the shifted record
    senses the orthogonal temporal phase, and for stationary input its dc
    component is independent of the unshifted one.
    """
    try:
        x_am, x_pm = ts[OUTPUT_NAMES[0]], ts[OUTPUT_NAMES[1]]
    except KeyError as exc:
        raise InvalidInputError(f"record lacks channel {exc}") from None
    if len(x_am) != len(x_pm):
        raise InvalidInputError("output channels have different lengths")
    xi = synodyne_record(x_am, x_pm, ts.times, tones, time_shift)
    channels = dict(ts.channels)
    channels[XI] = xi
    return TimeSeries(ts.dt, channels, t0=ts.t0, meta=dict(ts.meta))


def quarter_period(tones: LoTones) -> float:
    return math.pi / (2 * tones.omega_s)

"""Two-tone local oscillator algebra and synodyne figures of merit.

A two-tone LO with complex tone amplitudes ``alpha_plus`` and ``alpha_minus``
at offsets ``+omega_s`` and ``-omega_s`` from the carrier measures, at dc, the
complex quadrature combination given by the normalized spinor
``(alpha_am, alpha_pm)``.  Real spinors reproduce ordinary homodyne detection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .covariance import CovarianceMatrix, covariance_at
from .errors import InvalidParameterError, NoSignalError, OptimizationError, ZeroIntensityError
from .model import SystemParams, responses, with_cooperativity

SPINOR_NORM_TOL = 1e-12


@dataclass(frozen=True)
class LoTones:
    """Complex amplitudes of the two LO tones and their offset ``omega_s``."""

    alpha_plus: complex
    alpha_minus: complex
    omega_s: float

    def __post_init__(self):
        if not self.omega_s > 0:
            raise InvalidParameterError(f"omega_s must be positive, got {self.omega_s!r}")

    @property
    def intensity(self) -> float:
        return abs(self.alpha_plus) ** 2 + abs(self.alpha_minus) ** 2


@dataclass(frozen=True)
class LoSpinor:
    """Normalized complex detection weights on the AM and PM quadratures."""

    alpha_am: complex
    alpha_pm: complex

    def __post_init__(self):
        norm = abs(self.alpha_am) ** 2 + abs(self.alpha_pm) ** 2
        if not abs(norm - 1.0) <= SPINOR_NORM_TOL:
            raise InvalidParameterError(f"spinor is not normalized (|am|^2 + |pm|^2 = {norm!r})")

    @classmethod
    def normalized(cls, alpha_am, alpha_pm) -> "LoSpinor":
        """Build a spinor from unnormalized weights."""
        norm = math.sqrt(abs(alpha_am) ** 2 + abs(alpha_pm) ** 2)
        if norm == 0:
            raise ZeroIntensityError("cannot normalize a zero spinor")
        return cls(complex(alpha_am) / norm, complex(alpha_pm) / norm)

    @property
    def pow_am(self) -> float:
        return abs(self.alpha_am) ** 2

    @property
    def pow_pm(self) -> float:
        return abs(self.alpha_pm) ** 2

    def gauge_rotated(self, phi: float) -> "LoSpinor":
        """``(alpha_am e^{i phi}, alpha_pm e^{-i phi})``: the same detector with its LO delayed by ``phi / omega_s``.

        Every dc figure of merit depends on the spinor only through
        ``|alpha_am|``, ``|alpha_pm|`` and ``conj(alpha_am) conj(alpha_pm)``,
        which this map leaves unchanged.
        """
        u = complex(math.cos(phi), math.sin(phi))
        return LoSpinor(self.alpha_am * u, self.alpha_pm * u.conjugate())


def spinor_from_tones(tones: LoTones) -> LoSpinor:
    """Detection spinor realized by a pair of LO tones.

    ``alpha_am = (a+ + conj(a-)) / sqrt(2 I)`` and
    ``alpha_pm = i (conj(a+) - a-) / sqrt(2 I)`` with ``I = |a+|^2 + |a-|^2``.
    """
    intensity = tones.intensity
    if intensity == 0:
        raise ZeroIntensityError("both LO tones are zero")
    ap, am = complex(tones.alpha_plus), complex(tones.alpha_minus)
    scale = math.sqrt(2 * intensity)
    alpha_am = (ap + am.conjugate()) / scale
    alpha_pm = 1j * (ap.conjugate() - am) / scale
    # renormalize away rounding so the spinor invariant holds to the last ulp
    return LoSpinor.normalized(alpha_am, alpha_pm)


def tones_from_spinor(spinor: LoSpinor, intensity: float, omega_s: float) -> LoTones:
    """Inverse of :func:`spinor_from_tones` at a given total LO intensity."""
    if not intensity > 0:
        raise ZeroIntensityError(f"intensity must be positive, got {intensity!r}")
    a, p = complex(spinor.alpha_am), complex(spinor.alpha_pm)
    half = math.sqrt(2 * intensity) / 2
    alpha_plus = half * (a + 1j * p.conjugate())
    alpha_minus = half * (a.conjugate() + 1j * p)
    return LoTones(alpha_plus, alpha_minus, omega_s)


def shifted_tones(tones: LoTones, tau: float) -> LoTones:
    """Tones whose waveform is ``alpha(t + tau)``.

    The spinor picks up ``alpha_am -> alpha_am exp(i omega_s tau)`` and
    ``alpha_pm -> alpha_pm exp(-i omega_s tau)``, so the dc noise is unchanged
    while the temporal phase of detection moves by ``-omega_s tau``.
    """
    u = complex(math.cos(tones.omega_s * tau), math.sin(tones.omega_s * tau))
    return LoTones(complex(tones.alpha_plus) * u, complex(tones.alpha_minus) * u.conjugate(), tones.omega_s)


def lo_quadratures(tones: LoTones, t):
    """Real and imaginary parts of :func:`lo_waveform` (one cosine and one sine per sample)."""
    phase = tones.omega_s * np.asarray(t, dtype=float)
    c, s = np.cos(phase), np.sin(phase)
    total = complex(tones.alpha_plus) + complex(tones.alpha_minus)
    diff = complex(tones.alpha_plus) - complex(tones.alpha_minus)
    return total.real * c - diff.imag * s, total.imag * c + diff.real * s


def lo_waveform(tones: LoTones, t) -> np.ndarray:
    """Complex LO envelope ``alpha(t)`` in the rotating frame of the carrier.

    The tone ``alpha_plus`` carries ``exp(+i omega_s t)``.  Together with the
    ``exp(-i omega t)`` transform convention of :mod:`synodyne.covariance`, this
    is the assignment for which the dc noise of the demodulated record equals
    :func:`synodyne_psd_dc` of :func:`spinor_from_tones`.
    """
    re, im = lo_quadratures(tones, t)
    return re + 1j * im


def synodyne_psd_dc(cov: CovarianceMatrix, spinor: LoSpinor):
    """Dc noise spectral density of a synodyne detector with ``omega_s`` at ``cov.omega``."""
    a, p = spinor.alpha_am, spinor.alpha_pm
    cross = np.real(np.conj(a) * np.conj(p) * cov.c12)
    return abs(a) ** 2 * cov.c11 + abs(p) ** 2 * cov.c22 + 2 * cross


def force_imprecision(params: SystemParams, spinor: LoSpinor) -> float:
    """Imprecision of one temporal component of a force at the mechanical resonance.

    ``S_syn(0) / (2 |alpha_pm|^2 |t_p(omega_m)|^2)`` in zero-point units.
    """
    if spinor.pow_pm == 0:
        raise NoSignalError("alpha_pm = 0: a pure AM detector does not see the force")
    cov = covariance_at(params, params.omega_m)
    t_p = responses(params, params.omega_m).t_p
    if abs(t_p) == 0:
        raise NoSignalError("zero coupling: the force is not transduced")
    return float(synodyne_psd_dc(cov, spinor) / (2 * spinor.pow_pm * abs(t_p) ** 2))


def homodyne_imprecision(params: SystemParams) -> float:
    """Phase-quadrature homodyne imprecision ``c22 / (2 |t_p|^2)`` at ``omega_m``."""
    return force_imprecision(params, LoSpinor(0.0, 1.0))


def _bracket_minimum(f, x0=0.0, step=1.0, max_iter=200):
    """Grow a (lo, mid, hi) bracket of a minimum of ``f`` around ``x0``."""
    a, b = x0 - step, x0
    fa, fb = f(a), f(b)
    if fa < fb:
        a, b, fa, fb = b, a, fb, fa
        step = -step
    c = b + step
    fc = f(c)
    for _ in range(max_iter):
        if fc > fb:
            return (a, b, c) if a < c else (c, b, a)
        a, fa, b, fb = b, fb, c, fc
        step *= 2
        c = b + step
        fc = f(c)
    raise OptimizationError("could not bracket a minimum")


def sql(params_template: SystemParams, rtol: float = 1e-10):
    """Standard quantum limit of phase-quadrature homodyne force detection.

    Minimizes :func:`homodyne_imprecision` over the cooperativity with the other
    parameters of ``params_template`` fixed.  Returns ``(c_om_star, s_sql)``.
    """
    from scipy.optimize import minimize_scalar

    def objective(log_c):
        return homodyne_imprecision(with_cooperativity(params_template, math.exp(log_c)))

    bracket = _bracket_minimum(objective)
    # xtol is absolute in log(c_om), i.e. relative in c_om
    res = minimize_scalar(objective, bracket=bracket, method="brent", options={"xtol": rtol})
    if not (res.success and math.isfinite(res.fun)):
        raise OptimizationError(f"SQL minimization failed: {res.message}")
    return math.exp(res.x), float(res.fun)

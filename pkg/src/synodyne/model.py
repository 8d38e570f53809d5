"""System parameters and closed-form linear response of the optomechanical cavity.

All rates and frequencies are in units of the cavity energy decay rate, so
``kappa`` is 1 unless a caller deliberately builds :class:`SystemParams` by
hand.  Every function accepts scalar or array frequencies and broadcasts.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

from .errors import AmbiguousCouplingError, InvalidParameterError, UnsupportedDetuningError


@dataclass(frozen=True)
class SystemParams:
    """Physical parameters of the linearized optomechanical system.

    Attributes
    ----------
    omega_m : float
        Mechanical resonance frequency.
    kappa : float
        Cavity energy decay rate (sets the unit of frequency).
    gamma_m : float
        Mechanical energy decay rate.
    nbar : float
        Thermal phonon occupation of the mechanical bath.
    g : float
        Dressed optomechanical coupling strength.
    delta : float
        Pump detuning.  Carried for completeness; operations reject nonzero values.
    """

    omega_m: float
    kappa: float = 1.0
    gamma_m: float = 0.002
    nbar: float = 0.0
    g: float = 0.0
    delta: float = 0.0

    def __post_init__(self):
        for name in ("omega_m", "kappa", "gamma_m"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise InvalidParameterError(f"{name} must be positive and finite, got {value!r}")
        if not (math.isfinite(self.nbar) and self.nbar >= 0):
            raise InvalidParameterError(f"nbar must be >= 0, got {self.nbar!r}")
        if not (math.isfinite(self.g) and self.g >= 0):
            raise InvalidParameterError(f"g must be >= 0, got {self.g!r}")
        if not math.isfinite(self.delta):
            raise InvalidParameterError(f"delta must be finite, got {self.delta!r}")

    @property
    def c_om(self) -> float:
        return cooperativity(self)


@dataclass(frozen=True)
class ResponseSet:
    """Response functions evaluated at ``omega`` (scalars or arrays)."""

    omega: np.ndarray | float
    chi_m: np.ndarray | complex
    chi_ba: np.ndarray | complex
    t_q: np.ndarray | complex
    t_p: np.ndarray | complex


def cooperativity(params: SystemParams) -> float:
    """Optomechanical cooperativity ``2 g**2 / (kappa * gamma_m)``."""
    return 2.0 * params.g**2 / (params.kappa * params.gamma_m)


def g_from_cooperativity(c_om: float, kappa: float, gamma_m: float) -> float:
    """Invert :func:`cooperativity` for the coupling strength."""
    if not (math.isfinite(c_om) and c_om >= 0):
        raise InvalidParameterError(f"cooperativity must be >= 0, got {c_om!r}")
    return math.sqrt(c_om * kappa * gamma_m / 2.0)


def make_params(omega_m, gamma_m, nbar=0.0, *, g=None, c_om=None, kappa=1.0, delta=0.0) -> SystemParams:
    """Build :class:`SystemParams` from either the coupling ``g`` or the cooperativity.

    Exactly one of ``g`` and ``c_om`` must be given.

    >>> make_params(0.2, 0.002, 0.0, c_om=0.9).g  # doctest: +ELLIPSIS
    0.03000...
    """
    if (g is None) == (c_om is None):
        raise AmbiguousCouplingError("specify exactly one of g and c_om")
    if c_om is not None:
        if not (math.isfinite(kappa) and kappa > 0 and math.isfinite(gamma_m) and gamma_m > 0):
            raise InvalidParameterError("kappa and gamma_m must be positive")
        g = g_from_cooperativity(c_om, kappa, gamma_m)
    return SystemParams(omega_m=omega_m, kappa=kappa, gamma_m=gamma_m, nbar=nbar, g=g, delta=delta)


def with_cooperativity(params: SystemParams, c_om: float) -> SystemParams:
    """Copy of ``params`` with the coupling reset to give cooperativity ``c_om``."""
    return dataclasses.replace(params, g=g_from_cooperativity(c_om, params.kappa, params.gamma_m))


def require_resonant(params: SystemParams) -> None:
    if params.delta != 0:
        raise UnsupportedDetuningError(f"only delta = 0 is supported, got {params.delta!r}")


def mech_susceptibility(params: SystemParams, omega):
    """Mechanical susceptibility ``1 / (gamma_m**2/4 + omega_m**2 - omega**2 + i omega gamma_m)``."""
    w = np.asarray(omega, dtype=float)
    gm = params.gamma_m
    return 1.0 / (gm**2 / 4 + params.omega_m**2 - w**2 + 1j * w * gm)


def responses(params: SystemParams, omega) -> ResponseSet:
    """Evaluate the mechanical susceptibility, back-action and transduction functions.

    ``t_q`` and ``t_p`` map the mechanical position and momentum input noises
    onto the phase quadrature of the output light; ``chi_ba`` maps the
    amplitude quadrature of the input light onto it.
    """
    require_resonant(params)
    w = np.asarray(omega, dtype=float)
    k, gm, wm, g = params.kappa, params.gamma_m, params.omega_m, params.g
    chi_m = mech_susceptibility(params, w)
    cavity = k / 2 + 1j * w
    pref = g * math.sqrt(k * gm)
    t_q = pref * (gm / 2 + 1j * w) / cavity * chi_m
    t_p = pref * wm / cavity * chi_m
    chi_ba = g**2 * k * wm / (k**2 / 4 + w**2) * chi_m
    if w.ndim == 0:
        return ResponseSet(float(w), complex(chi_m), complex(chi_ba), complex(t_q), complex(t_p))
    return ResponseSet(w, chi_m, chi_ba, t_q, t_p)


def cavity_allpass(params: SystemParams, omega):
    """Cavity delay factor ``(kappa/2 - i omega) / (kappa/2 + i omega)``; unit modulus."""
    w = np.asarray(omega, dtype=float)
    return (params.kappa / 2 - 1j * w) / (params.kappa / 2 + 1j * w)

"""Linear state-space realization of the optomechanical Langevin equations.

State ``x = (Q, P, X_cav_AM, X_cav_PM)``; inputs ``w = (Q_in, P_in, X_AM_in,
X_PM_in)``; outputs ``y = (X_AM_out, X_PM_out)``::

    dx/dt = A x + B w + F f(t)
    y     = C x + D w

A classical force ``f`` drives the mechanical momentum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..covariance import covariance_at
from ..errors import NumericalError
from ..model import SystemParams, require_resonant, responses

STATE_NAMES = ("Q", "P", "X_cav_AM", "X_cav_PM")
INPUT_NAMES = ("Q_in", "P_in", "X_AM_in", "X_PM_in")
OUTPUT_NAMES = ("x_am_out", "x_pm_out")


@dataclass(frozen=True)
class StateSpace:
    drift: np.ndarray
    noise_map: np.ndarray
    input_psd: np.ndarray
    output_state: np.ndarray
    output_feedthrough: np.ndarray
    force_map: np.ndarray

    def poles(self) -> np.ndarray:
        return np.linalg.eigvals(self.drift)

    def is_hurwitz(self) -> bool:
        return bool(np.all(self.poles().real < 0))

    def with_input_psd(self, psd) -> "StateSpace":
        """Copy with a different input noise level (e.g. zeros for noiseless runs)."""
        psd = np.broadcast_to(np.asarray(psd, dtype=float), (4,)).copy()
        return StateSpace(self.drift, self.noise_map, psd, self.output_state,
                          self.output_feedthrough, self.force_map)


def build_state_space(params: SystemParams) -> StateSpace:
    """Drift, noise and output maps of the linearized dynamics at resonant pumping."""
    require_resonant(params)
    wm, gm, k, g = params.omega_m, params.gamma_m, params.kappa, params.g
    drift = np.array([
        [-gm / 2, wm, 0.0, 0.0],
        [-wm, -gm / 2, -g, 0.0],
        [0.0, 0.0, -k / 2, 0.0],
        [-g, 0.0, 0.0, -k / 2],
    ])
    noise_map = np.diag([math.sqrt(gm), math.sqrt(gm), math.sqrt(k), math.sqrt(k)])
    thermal = params.nbar + 0.5
    input_psd = np.array([thermal, thermal, 0.5, 0.5])
    output_state = np.array([
        [0.0, 0.0, math.sqrt(k), 0.0],
        [0.0, 0.0, 0.0, math.sqrt(k)],
    ])
    output_feedthrough = np.array([
        [0.0, 0.0, -1.0, 0.0],
        [0.0, 0.0, 0.0, -1.0],
    ])
    force_map = np.array([0.0, 1.0, 0.0, 0.0])
    return StateSpace(drift, noise_map, input_psd, output_state, output_feedthrough, force_map)


def transfer_matrix(ss: StateSpace, omega) -> np.ndarray:
    """Input-to-output gains ``C (i omega - A)^-1 B + D``, shape ``(n_omega, 2, 4)``."""
    w = np.atleast_1d(np.asarray(omega, dtype=float))
    n = ss.drift.shape[0]
    resolvent_arg = 1j * w[:, None, None] * np.eye(n) - ss.drift
    try:
        solved = np.linalg.solve(resolvent_arg, np.broadcast_to(ss.noise_map, resolvent_arg.shape))
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"singular resolvent: {exc}") from exc
    return ss.output_state @ solved + ss.output_feedthrough


def force_transfer(ss: StateSpace, omega) -> np.ndarray:
    """Gain from the classical force to the two output quadratures, shape ``(n_omega, 2)``."""
    w = np.atleast_1d(np.asarray(omega, dtype=float))
    n = ss.drift.shape[0]
    resolvent_arg = 1j * w[:, None, None] * np.eye(n) - ss.drift
    try:
        solved = np.linalg.solve(resolvent_arg, np.broadcast_to(ss.force_map[:, None], (len(w), n, 1)))
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"singular resolvent: {exc}") from exc
    return (ss.output_state @ solved)[..., 0]


def output_covariance(ss: StateSpace, omega) -> np.ndarray:
    """Output spectral matrix ``H S H^dagger`` implied by the state space, shape ``(n, 2, 2)``."""
    h = transfer_matrix(ss, omega)
    return (h * ss.input_psd) @ np.conj(np.swapaxes(h, -1, -2))


def _rel_dev(got, want) -> float:
    got, want = np.asarray(got), np.asarray(want)
    scale = np.abs(want)
    dev = np.where(scale > 0, np.abs(got - want) / np.where(scale > 0, scale, 1.0), np.abs(got))
    return float(np.max(dev)) if dev.size else 0.0


def transfer_function_check(ss: StateSpace, params: SystemParams, omega) -> float:
    """Largest relative mismatch between the state space and the closed-form responses.

    Compares ``|t_q|``, ``|t_p|``, ``|chi_ba|`` with the corresponding gain
    magnitudes, and ``c11``, ``c12``, ``c22`` with the output spectral matrix.
    Magnitudes only: the realization differs from the closed forms by an
    overall sign on the mechanical terms and by the unit-modulus cavity delay
    on the optical inputs.
    """
    w = np.atleast_1d(np.asarray(omega, dtype=float))
    h = transfer_matrix(ss, w)
    r = responses(params, w)
    cov = covariance_at(params, w)
    spec = output_covariance(ss, w)
    return max(
        _rel_dev(np.abs(h[:, 1, 0]), np.abs(r.t_q)),
        _rel_dev(np.abs(h[:, 1, 1]), np.abs(r.t_p)),
        _rel_dev(np.abs(h[:, 1, 2]), np.abs(r.chi_ba)),
        _rel_dev(spec[:, 0, 0].real, cov.c11),
        _rel_dev(spec[:, 0, 1], cov.c12),
        _rel_dev(spec[:, 1, 1].real, cov.c22),
    )

"""Optimal LO spinors and cooperativity sweeps.

Closed forms are the production path.  :func:`numerical_noise_minimum` and
:func:`numerical_force_minimum` are derivative-free reference minimizers kept
for cross-checking them.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .covariance import CovarianceMatrix, covariance_at, eigenvalues
from .detection import LoSpinor, force_imprecision, homodyne_imprecision, synodyne_psd_dc
from .errors import InvalidInputError, NoTransductionError
from .model import SystemParams, responses, with_cooperativity

DEFAULT_GRID = np.logspace(-2, 2, 32)


@dataclass(frozen=True)
class SweepRow:
    c_om: float
    pow_am: float
    pow_pm: float
    objective: float
    reference: float


def _phased_spinor(mag_am: float, mag_pm: float, c12: complex) -> LoSpinor:
    # gauge: alpha_am real and non-negative; arg(am) + arg(pm) = arg(c12) + pi
    if c12 == 0:
        phase = 1.0 + 0j
    else:
        phase = -complex(c12) / abs(c12)
    return LoSpinor.normalized(mag_am, mag_pm * phase)


def optimal_noise_spinor(cov: CovarianceMatrix):
    """Spinor minimizing the synodyne dc noise, and the minimum (the lower eigenvalue).

    The phases make the cross term fully negative, which reduces the problem to
    the real matrix ``[[c11, -|c12|], [-|c12|, c22]]``; the magnitudes are the
    components of its lower eigenvector.
    """
    c11, c22, m12 = float(cov.c11), float(cov.c22), abs(cov.c12)
    c_minus, _ = eigenvalues(cov)
    if m12 == 0:
        mags = (1.0, 0.0) if c11 <= c22 else (0.0, 1.0)
    else:
        # two algebraically equivalent eigenvectors; take the better conditioned one
        v1 = (m12, c11 - c_minus)
        v2 = (c22 - c_minus, m12)
        mags = v1 if math.hypot(*v1) >= math.hypot(*v2) else v2
    return _phased_spinor(mags[0], mags[1], complex(cov.c12)), float(c_minus)


def optimal_force_spinor(params: SystemParams):
    """Spinor minimizing the force imprecision, and that minimum.

    The optimum is ``|alpha_am| / |alpha_pm| = |c12| / c11`` with the same phase
    condition as :func:`optimal_noise_spinor`; the resulting imprecision
    ``(c22 - |c12|^2 / c11) / (2 |t_p|^2)`` has no back-action term.
    """
    if params.g == 0:
        raise NoTransductionError("g = 0: no force transduction to optimize")
    cov = covariance_at(params, params.omega_m)
    t_p = responses(params, params.omega_m).t_p
    ratio = abs(cov.c12) / cov.c11
    spinor = _phased_spinor(ratio, 1.0, complex(cov.c12))
    s_ff = (cov.c22 - abs(cov.c12) ** 2 / cov.c11) / (2 * abs(t_p) ** 2)
    return spinor, float(s_ff)


NOISE_GRID = (33, 64)


def _spinor_from_angles(x) -> LoSpinor:
    mix, phase_pm = x
    return LoSpinor(math.cos(mix), math.sin(mix) * complex(math.cos(phase_pm), math.sin(phase_pm)))


def _restarted_minimize(f, n_starts=8):
    best = None
    for k in range(n_starts):
        x0 = np.array([(k + 0.5) * (math.pi / 2) / n_starts, (2 * k + 1) * math.pi / n_starts - math.pi])
        res = minimize(f, x0, method="Nelder-Mead", options={"xatol": 1e-12, "fatol": 1e-15, "maxiter": 4000})
        # polish from the best simplex vertex
        res = minimize(f, res.x, method="Nelder-Mead", options={"xatol": 1e-13, "fatol": 1e-16, "maxiter": 4000})
        if best is None or res.fun < best.fun:
            best = res
    return best


def numerical_noise_minimum(cov: CovarianceMatrix):
    """Reference minimum of the synodyne dc noise by direct search over spinors.

    After fixing the common phase, a spinor is ``(cos m, sin m e^{i p})``.  A
    deterministic grid over ``(m, p)`` locates the basin and Nelder-Mead polishes
    the best grid point.  The grid replaces multiple restarts here because this
    search runs thousands of times in the test suite.
    """
    c11, c22 = float(cov.c11), float(cov.c22)
    c12 = complex(cov.c12)

    def f(x):
        # synodyne_psd_dc written out in the angle parametrization
        cm, sm = math.cos(x[0]), math.sin(x[0])
        cross = (c12 * complex(math.cos(x[1]), -math.sin(x[1]))).real
        return cm * cm * c11 + sm * sm * c22 + 2 * cm * sm * cross

    m = np.linspace(0.0, math.pi / 2, NOISE_GRID[0])[:, None]
    p = np.linspace(-math.pi, math.pi, NOISE_GRID[1], endpoint=False)[None, :]
    cross = np.real(c12 * np.exp(-1j * p))
    grid = np.cos(m) ** 2 * c11 + np.sin(m) ** 2 * c22 + 2 * np.cos(m) * np.sin(m) * cross
    i, j = np.unravel_index(np.argmin(grid), grid.shape)
    res = minimize(f, np.array([m[i, 0], p[0, j]]), method="Nelder-Mead",
                   options={"xatol": 1e-9, "fatol": 1e-15 * (c11 + c22), "maxiter": 4000})
    spinor = _spinor_from_angles(res.x)
    return spinor, float(synodyne_psd_dc(cov, spinor))


def numerical_force_minimum(params: SystemParams):
    """Reference minimum of :func:`force_imprecision` by direct search."""

    def f(x):
        spinor = _spinor_from_angles(x)
        if spinor.pow_pm < 1e-300:
            return math.inf
        return force_imprecision(params, spinor)

    best = _restarted_minimize(f)
    return _spinor_from_angles(best.x), float(best.fun)


def worker_count() -> int:
    """Worker cap from ``SYNODYNE_THREADS`` (default: CPU count)."""
    raw = os.environ.get("SYNODYNE_THREADS")
    if raw is None:
        return os.cpu_count() or 1
    try:
        n = int(raw)
    except ValueError:
        raise InvalidInputError(f"SYNODYNE_THREADS must be an integer, got {raw!r}") from None
    if n < 1:
        raise InvalidInputError(f"SYNODYNE_THREADS must be >= 1, got {n}")
    return n


def _noise_row(params: SystemParams, c_om: float) -> SweepRow:
    p = with_cooperativity(params, c_om)
    cov = covariance_at(p, p.omega_m)
    spinor, value = optimal_noise_spinor(cov)
    reference = float(np.linalg.eigvalsh(cov.as_array())[0])
    return SweepRow(float(c_om), spinor.pow_am, spinor.pow_pm, value, reference)


def _force_row(params: SystemParams, c_om: float) -> SweepRow:
    p = with_cooperativity(params, c_om)
    spinor, value = optimal_force_spinor(p)
    return SweepRow(float(c_om), spinor.pow_am, spinor.pow_pm, value, homodyne_imprecision(p))


def sweep(params_template: SystemParams, c_om_grid=None, objective: str = "noise") -> list[SweepRow]:
    """Optimize the LO at every cooperativity of ``c_om_grid``.

    ``objective`` is ``"noise"`` (reference column: lower eigenvalue of the
    covariance, computed by eigendecomposition) or ``"force"`` (reference
    column: phase-quadrature homodyne imprecision).  Rows come back in grid order.
    """
    grid = DEFAULT_GRID if c_om_grid is None else np.asarray(c_om_grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise InvalidInputError("cooperativity grid must be a non-empty 1-D sequence")
    if not np.all(np.isfinite(grid)) or np.any(grid <= 0) or np.any(np.diff(grid) <= 0):
        raise InvalidInputError("cooperativity grid must be positive and strictly increasing")
    try:
        row = {"noise": _noise_row, "force": _force_row}[objective]
    except KeyError:
        raise InvalidInputError(f"unknown objective {objective!r}") from None
    workers = min(worker_count(), grid.size)
    if workers == 1:
        return [row(params_template, c) for c in grid]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda c: row(params_template, c), grid))

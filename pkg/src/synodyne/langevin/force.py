"""Phase-sensitive force estimation from the synodyne dc signal.

A force ``A cos(omega_m t - phi)`` on the momentum shifts the dc average of the
synodyne record by ``gain * A * cos(phi - phi_aligned)``.  The gain is measured
from a noiseless run, so the estimate needs no analytic transduction, and the
deterministic ring-up transient of the mechanics is calibrated out with it.

Each run also yields the estimate from the LO advanced by a quarter period,
which senses the orthogonal temporal phase with the same noise level and
independent fluctuations.

In units where the momentum noise enters with unit strength (force divided by
``sqrt(gamma_m)``), the variance of the amplitude estimate from a record of
duration ``T`` is ``4 S_FF / T``, with ``S_FF`` from
:func:`synodyne.detection.force_imprecision`.
"""

from __future__ import annotations

import cmath
import dataclasses
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import stats

from ..detection import LoTones, shifted_tones, spinor_from_tones
from ..errors import InvalidInputError, NoSignalError
from ..optimize import worker_count
from .demod import quarter_period, synodyne_pair
from .simulate import DEFAULT_CHUNK, ForceProfile, SimConfig, iter_chunks, run_seed
from .statespace import OUTPUT_NAMES, StateSpace, force_transfer


@dataclass(frozen=True)
class ForceEstimate:
    """Aligned-component estimate with its confidence interval.

    ``samples`` holds the per-run aligned estimates and ``orthogonal`` the
    per-run estimates of the component a quarter period away.
    """

    estimate: float
    ci_low: float
    ci_high: float
    samples: np.ndarray
    orthogonal: np.ndarray
    gains: tuple[float, float]


def aligned_phase(ss: StateSpace, tones: LoTones) -> float:
    """Force temporal phase to which the synodyne dc signal is maximally sensitive."""
    spinor = spinor_from_tones(tones)
    if spinor.pow_pm == 0:
        raise NoSignalError("alpha_pm = 0: the detector does not see the force")
    h = force_transfer(ss, tones.omega_s)[0, 1]
    return cmath.phase(spinor.alpha_pm) + cmath.phase(h)


def analytic_gain(ss: StateSpace, tones: LoTones) -> float:
    """Steady-state dc response per unit aligned force amplitude, ``|H| |alpha_pm| / sqrt(2)``."""
    spinor = spinor_from_tones(tones)
    h = force_transfer(ss, tones.omega_s)[0, 1]
    return abs(h) * math.sqrt(spinor.pow_pm) / math.sqrt(2)


def dc_averages(ss: StateSpace, cfg: SimConfig, tones: LoTones, chunk: int = DEFAULT_CHUNK):
    """Time averages of the synodyne record and of its quarter-period-advanced twin."""
    sums = np.zeros(2)
    n = 0
    for block in iter_chunks(ss, cfg, chunk):
        first, second = synodyne_pair(block[OUTPUT_NAMES[0]], block[OUTPUT_NAMES[1]], block.times, tones)
        sums += (first.sum(), second.sum())
        n += len(first)
    return sums / n


def calibration_gains(ss: StateSpace, tones: LoTones, cfg: SimConfig, amplitude: float = 1.0):
    """Noiseless dc response per unit force for the aligned and the orthogonal record."""
    if not amplitude > 0:
        raise InvalidInputError("calibration needs a nonzero reference force")
    quiet = ss.with_input_psd(0.0)
    gains = []
    for i, lo in enumerate((tones, shifted_tones(tones, quarter_period(tones)))):
        ref = ForceProfile(amplitude, tones.omega_s, aligned_phase(ss, lo))
        gains.append(dc_averages(quiet, dataclasses.replace(cfg, force=ref), tones)[i] / amplitude)
    return gains[0], gains[1]


def empirical_imprecision(samples, duration: float, gamma_m: float) -> float:
    """Imprecision implied by the spread of amplitude estimates (see module docstring).

    ``samples`` may be 2-D, one row per group with its own mean; the variance is
    then pooled over rows.
    """
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    if samples.shape[1] < 2:
        raise InvalidInputError("need at least two repetitions")
    var = float(np.mean(np.var(samples, axis=1, ddof=1)))
    return var * duration / (4 * gamma_m)


def estimate_force(ss: StateSpace, tones: LoTones, cfg: SimConfig, repetitions: int,
                   gains=None, confidence: float = 0.95) -> ForceEstimate:
    """Estimate the amplitude of the force component aligned with the detector.

    Runs ``repetitions`` independent simulations with ``cfg.force`` applied
    (seeds from :func:`run_seed` of ``cfg.seed``), divides each dc average by
    the noiseless calibration gain and returns the mean with a Student-t
    confidence interval.  A force not aligned with the detector contributes
    only its aligned component.
    """
    if repetitions < 2:
        raise InvalidInputError("repetitions must be >= 2")
    if spinor_from_tones(tones).pow_pm == 0:
        raise NoSignalError("alpha_pm = 0: the detector does not see the force")
    if gains is None:
        gains = calibration_gains(ss, tones, cfg)
    gains = np.asarray(gains, dtype=float)

    def one(i):
        run = dataclasses.replace(cfg, seed=run_seed(cfg.seed, i))
        return dc_averages(ss, run, tones) / gains

    workers = min(worker_count(), repetitions)
    if workers == 1:
        rows = [one(i) for i in range(repetitions)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(one, range(repetitions)))
    rows = np.array(rows)
    samples = rows[:, 0]
    mean = float(np.mean(samples))
    tq = float(stats.t.ppf(0.5 + confidence / 2, repetitions - 1))
    half = tq * float(np.std(samples, ddof=1)) / math.sqrt(repetitions)
    return ForceEstimate(mean, mean - half, mean + half, samples, rows[:, 1],
                         (float(gains[0]), float(gains[1])))

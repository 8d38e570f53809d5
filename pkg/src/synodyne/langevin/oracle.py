"""Long streaming oracle runs: output spectra and synodyne dc noise from one simulation."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.fft import next_fast_len

from ..detection import LoTones
from ..errors import InvalidInputError
from .demod import synodyne_pair
from .simulate import DEFAULT_CHUNK, SimConfig, iter_chunks
from .spectral import CrossSpectrum, WelchAccumulator
from .statespace import OUTPUT_NAMES, StateSpace


@dataclass(frozen=True)
class OracleResult:
    spectrum: CrossSpectrum | None
    psd_dc: float
    stderr_dc: float
    n_segments: int
    seed: int


def dc_segment_length(gamma_m: float, dt: float, cycles: float = 20.0) -> int:
    """Samples per segment so that the dc bin resolves the ``~gamma_m`` cancellation band.

    Rounded up to a length with small prime factors so full FFTs stay fast.
    """
    return next_fast_len(int(math.ceil(cycles * 2 * math.pi / gamma_m / dt)), real=True)


def duration_for_segments(segment_length: int, n_segments: int, dt: float, overlap_fraction: float = 0.5) -> float:
    """Record duration that yields ``n_segments`` overlapped Welch segments."""
    step = segment_length - int(round(overlap_fraction * segment_length))
    return ((n_segments - 1) * step + segment_length) * dt


def run_oracle(ss: StateSpace, cfg: SimConfig, tones: LoTones, segment_length: int,
               spectrum_segments: int | None = 0, overlap_fraction: float = 0.5,
               chunk: int = DEFAULT_CHUNK, on_block=None) -> OracleResult:
    """Simulate, demodulate with ``tones`` and estimate the synodyne dc noise.

    The dc density is the mean of the Welch dc bins of the record demodulated
    with the LO and with the LO delayed by a quarter period; the two have equal
    expectation and independent dc fluctuations.  If ``spectrum_segments`` is
    nonzero (``None``: all), the output quadratures of the first
    ``spectrum_segments`` segments also feed a full cross-spectral estimate.
    ``on_block(block, xi)``, if given, sees every simulated block together with
    its synodyne record.
    """
    if segment_length > cfg.n_steps:
        raise InvalidInputError("record shorter than one segment")
    dc = WelchAccumulator(2, segment_length, cfg.dt, overlap_fraction, bins=[0])
    spec = None
    spec_limit = 0
    if spectrum_segments != 0:
        spec = WelchAccumulator(2, segment_length, cfg.dt, overlap_fraction)
        spec_limit = cfg.n_steps if spectrum_segments is None else int(
            round(duration_for_segments(segment_length, spectrum_segments, 1.0, overlap_fraction)))
    fed = 0
    for block in iter_chunks(ss, cfg, chunk):
        x_am, x_pm = block[OUTPUT_NAMES[0]], block[OUTPUT_NAMES[1]]
        first, second = synodyne_pair(x_am, x_pm, block.times, tones)
        dc.feed(np.column_stack([first, second]))
        if on_block is not None:
            on_block(block, first)
        if spec is not None and fed < spec_limit:
            take = min(len(x_am), spec_limit - fed)
            spec.feed(np.column_stack([x_am[:take], x_pm[:take]]))
            fed += take
    dc_res = dc.result()
    psd = 0.5 * (dc_res.matrix[0, 0, 0].real + dc_res.matrix[0, 1, 1].real)
    # each dc bin carries one degree of freedom per effective segment; two records give two
    stderr = psd / math.sqrt(dc_res.n_effective)
    return OracleResult(spec.result() if spec is not None else None, float(psd), float(stderr),
                        dc_res.n_segments, int(cfg.seed))

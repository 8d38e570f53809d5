"""Time-domain stochastic oracle for the closed-form spectra."""

from .demod import XI, demodulate_synodyne, quarter_period, synodyne_pair, synodyne_record
from .force import (
    ForceEstimate,
    aligned_phase,
    analytic_gain,
    calibration_gains,
    dc_averages,
    empirical_imprecision,
    estimate_force,
)
from .oracle import OracleResult, dc_segment_length, duration_for_segments, run_oracle
from .records import read_records, write_records
from .simulate import ForceProfile, SimConfig, TimeSeries, discretize, iter_chunks, run_seed, simulate
from .spectral import (
    CrossSpectrum,
    Spectrum,
    WelchAccumulator,
    cross_spectrum,
    effective_segments,
    psd_welch,
    temporal_phase_components,
)
from .statespace import (
    OUTPUT_NAMES,
    StateSpace,
    build_state_space,
    force_transfer,
    output_covariance,
    transfer_function_check,
    transfer_matrix,
)

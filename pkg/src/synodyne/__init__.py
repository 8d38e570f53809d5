"""Complex squeezing spectra and two-tone (synodyne) detection of a linearized optomechanical cavity."""

from .covariance import CovarianceMatrix, covariance_at, eigenvalues, homodyne_psd, min_homodyne
from .detection import (
    LoSpinor,
    LoTones,
    force_imprecision,
    homodyne_imprecision,
    lo_waveform,
    shifted_tones,
    spinor_from_tones,
    sql,
    synodyne_psd_dc,
    tones_from_spinor,
)
from .errors import (
    AmbiguousCouplingError,
    InvalidInputError,
    InvalidParameterError,
    NoSignalError,
    NoTransductionError,
    NumericalError,
    OptimizationError,
    StepTooLargeError,
    SynodyneError,
    UnsupportedDetuningError,
    ZeroIntensityError,
)
from .model import (
    ResponseSet,
    SystemParams,
    cooperativity,
    g_from_cooperativity,
    make_params,
    mech_susceptibility,
    responses,
    with_cooperativity,
)
from .optimize import SweepRow, optimal_force_spinor, optimal_noise_spinor, sweep

__version__ = "0.1.0"

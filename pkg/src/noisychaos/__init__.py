"""Closed-form noise-averaged evolution channels and chaos diagnostics.

Single-particle spectra evolved under Hamiltonians with white-noise
perturbations drawn from the GUE or GOE admit exact ensemble-averaged
channels.  This package builds those channels, evaluates spectral and
operator diagnostics on top of them (spectral form factor, two-point
functions, out-of-time-order correlators, transfer and return
probabilities, Lanczos coefficients), and cross-validates everything
against a stochastic-trajectory Monte Carlo oracle.
"""

from .channel_one import (
    CaseTag,
    ChannelOne,
    GeneratorOne,
    apply_channel,
    apply_generator,
    build_L1,
    channel_from_json,
    channel_to_json,
    choi_matrix,
    dense_superoperator,
    u1_goe_const,
    u1_goe_general,
    u1_gue_const,
    u1_gue_general,
)
from .channel_two import (
    ChannelTwo,
    SffVariance,
    UnsupportedDimensionError,
    build_M,
    decay_rates,
    f_coefficients,
    f_matrix,
    otoc,
    otoc_noiseless,
    sff_squared_mean,
    sff_variance,
)
from .diagnostics import (
    DiagnosticSeries,
    effective_hamiltonian,
    return_probability,
    sff_from_channel,
    sff_goe_const,
    sff_gue_const,
    sff_noiseless,
    transfer_probability,
    two_point_goe_const,
    two_point_gue_const,
    two_point_noiseless,
)
from .krylov import (
    LanczosBreakdownError,
    LanczosResult,
    lanczos_from_moments,
    noisy_moments,
    sech_moments,
    signed_lanczos_noisy,
)
from .montecarlo import (
    TrajectoryConfig,
    UnitarityError,
    estimate_otoc,
    estimate_sff,
    estimate_sff_squared,
    estimate_transfer,
    estimate_two_point,
    evolve_trajectory,
)
from .noise import (
    ConstantOverD,
    Ensemble,
    GibbsProfile,
    InvalidStepError,
    MatrixProfile,
    NoiseModel,
    goe_constant,
    gue_constant,
    model_from_config,
    sample_noise_matrix,
    sample_noise_sequence,
)
from .spectra import (
    DegenerateSpectrumError,
    InvalidDimensionError,
    Spectrum,
    level_statistics,
    sample_goe_spectrum,
    sample_gue_spectrum,
)

__version__ = "0.1.0"

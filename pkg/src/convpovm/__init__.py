"""Convolutions of measures and POVMs, their moment operators, and phase-space marginals."""

from .measures import (
    Density,
    DivergentMomentError,
    GridError,
    MeasureError,
    MomentReport,
    ProbabilityMeasure,
    ScalarMeasure,
    Verdict,
    VerdictRule,
    binomial_convolution_moment,
    convolve,
    example1_build,
    example1_slice_absolute_integral,
    integrate,
    moment,
    total_variation,
)
from .operators import (
    SpectralDecomposition,
    apply_function,
    decompose,
    hs_norm,
    trace_pairing,
)
from .semispectral import (
    DiscretizedPOVM,
    SpectralMeasureFD,
    bilinear_measure,
    hs_moment_diagnostic,
    moment_operator_binomial,
    moment_operator_direct,
    smear,
    spectral_measure_of,
    state_distribution,
    trace_moment,
)
from .phasespace import (
    PhaseSpaceGrid,
    PhaseSpacePOVM,
    build_phase_space_povm,
    marginal_convolution_check,
    marginal_moment_operator,
    marginal_x,
    marginal_y,
    momentum_operator,
    position_operator,
    weyl,
)
from .sampling import OutcomeSample, empirical_moment, predicted_moment, sample

__version__ = "0.1.0"

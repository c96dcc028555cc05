"""Approximation of periodic functions by translates of one generator."""

from .spectral import (
    GridSamples,
    SpectralCoefficients,
    coeffs_from_samples,
    convolve,
    evaluate,
    lp_norm,
    sample,
)
from .symbols import (
    Symbol,
    J_m,
    epsilon_m,
    make_exponent,
    make_korobov,
    make_mask,
    make_theta,
)
from .univariate import (
    HLambdaFunction,
    TranslateApproximant,
    approx_error,
    assemble_Q,
    eval_approximant,
    sample_approximant,
    spectral_oracle_Q,
)


from .multivariate import (
    P_op,
    Q_tensor,
    T_op,
    apply_Q_axis,
    q_op,
    smolyak_error,
    smolyak_grid,
    sum_cardinality,
    translate_representation,
)
from .experiments import ExperimentConfig, RateFitResult, gen_g, run_multivariate, run_univariate

__version__ = "0.1.0"

"""Evaluate, optimize and validate the gap functional h(c) for zeros of zeta."""

from .arith import (
    DivisorParams,
    SieveTables,
    build_sieve,
    divisor_r,
    liouville,
    sine_integral,
    von_mangoldt,
)
from .errors import (
    AccuracyError,
    ConditioningError,
    OutOfBranchError,
    ParameterError,
    SearchFailureError,
    ZetaGapsError,
)
from .functional import (
    FunctionalParams,
    Mode,
    PolynomialF,
    QuadratureSpec,
    eval_h,
    eval_h_quadrature,
    eval_h_r1,
    eval_h_series,
)
from .optimizer import (
    GapMatrices,
    OptimizationResult,
    build_gap_matrices,
    find_critical_c,
    optimal_f_eigen,
    optimize_r,
)
from .oracle import OracleParams, convergence_study, discrete_h

__version__ = "0.1.0"

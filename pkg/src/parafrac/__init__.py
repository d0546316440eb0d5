"""Parallel-in-time solver for quasilinear time-fractional diffusion.

The package couples an L1 discretisation of the Caputo derivative with
Chebyshev collocation in space and a parareal iteration in time, plus
calculators for the convergence-bound recurrences and a benchmark
harness.
"""

from .bounds import (
    BoundParams,
    LipschitzConstants,
    double_sum_bound,
    double_sum_exact,
    gronwall_brute,
    gronwall_closed,
    lipschitz_coarse,
    lipschitz_fine,
    single_sum_bound,
    single_sum_exact,
    iteration_error_bound,
)
from .errors import CoefficientError, DivergenceError, ParafracError, SolverFailure
from .l1 import (
    FractionalWeights,
    TimeGrids,
    caputo_power,
    discrete_caputo_coarse,
    discrete_caputo_hybrid,
    l1_weight,
)
from .parareal import PararealIterate, PararealReport, exactness_check, parareal_solve
from .problems import ProblemSpec, get_problem, registry_names
from .spectral import SpectralOperator, assemble_diffusion, build_operator, l2_norm
from .stepping import (
    chain_fine,
    coarse_step,
    fine_propagate,
    initial_state,
    run_coarse,
    run_fine_sequential,
)

__version__ = "0.1.0"

__all__ = [
    "BoundParams",
    "CoefficientError",
    "DivergenceError",
    "FractionalWeights",
    "LipschitzConstants",
    "ParafracError",
    "PararealIterate",
    "PararealReport",
    "ProblemSpec",
    "SolverFailure",
    "SpectralOperator",
    "TimeGrids",
    "assemble_diffusion",
    "build_operator",
    "caputo_power",
    "chain_fine",
    "coarse_step",
    "discrete_caputo_coarse",
    "discrete_caputo_hybrid",
    "double_sum_bound",
    "double_sum_exact",
    "exactness_check",
    "fine_propagate",
    "get_problem",
    "gronwall_brute",
    "gronwall_closed",
    "initial_state",
    "l1_weight",
    "l2_norm",
    "lipschitz_coarse",
    "lipschitz_fine",
    "parareal_solve",
    "registry_names",
    "run_coarse",
    "run_fine_sequential",
    "single_sum_bound",
    "single_sum_exact",
    "iteration_error_bound",
]

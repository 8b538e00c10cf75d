"""Sparsity-inducing stochastic gradient-free optimization.

A zeroth-order solver for convex and strongly convex stochastic objectives
whose optimum is (approximately) sparse: gradients are estimated from paired
function evaluations along random sign directions, and every step passes
through a thresholding projection onto the l1 ball, so iterates stay sparse
and feasible.  The package bundles the solver, a Gaussian-smoothing
baseline, a metered oracle abstraction with strict query accounting, and a
reproducible synthetic benchmark harness with CSV output.
"""

from .algorithm import IterateTrace, RunResult, aos_select, run, sample_output_index
from .backends import HAVE_COMPILED
from .baselines import SgfParams, sgf_default_params, sgf_run
from .errors import (
    BudgetExhausted,
    BudgetTooSmall,
    ConfigError,
    DimensionTooLarge,
    DomainViolation,
    EmptySample,
    InvalidInput,
    InvalidVariant,
    SisgfError,
)
from .experiment import AlgorithmSettings, default_algorithms, run_experiment
from .oracle import DeterministicProblem, OracleSession, ProblemSpec, StochasticProblem, true_gap
from .projection import (
    ProjectionCertificate,
    ProjectionInput,
    brute_force_reference,
    sparsify_project,
    verify_kkt,
)
from .quadratic import (
    QuadraticProblem,
    QuadraticProblemConfig,
    estimate_sigma_sq,
    generate_problem,
)
from .schedule import HyperParams, Variant, choose_K_for_budget, make_schedule
from .smoothing import (
    SmoothingConfig,
    check_directional_bias,
    check_value_bias,
    estimate_gradient,
    rademacher_direction,
)

__version__ = "0.1.0"

__all__ = [
    "AlgorithmSettings",
    "BudgetExhausted",
    "BudgetTooSmall",
    "ConfigError",
    "DeterministicProblem",
    "DimensionTooLarge",
    "DomainViolation",
    "EmptySample",
    "HAVE_COMPILED",
    "HyperParams",
    "InvalidInput",
    "InvalidVariant",
    "IterateTrace",
    "OracleSession",
    "ProblemSpec",
    "ProjectionCertificate",
    "ProjectionInput",
    "QuadraticProblem",
    "QuadraticProblemConfig",
    "RunResult",
    "SgfParams",
    "SisgfError",
    "SmoothingConfig",
    "StochasticProblem",
    "Variant",
    "aos_select",
    "brute_force_reference",
    "check_directional_bias",
    "check_value_bias",
    "choose_K_for_budget",
    "default_algorithms",
    "estimate_gradient",
    "estimate_sigma_sq",
    "generate_problem",
    "make_schedule",
    "rademacher_direction",
    "run",
    "run_experiment",
    "sample_output_index",
    "sgf_default_params",
    "sgf_run",
    "sparsify_project",
    "true_gap",
    "verify_kkt",
]

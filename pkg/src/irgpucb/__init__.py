"""Randomized GP-UCB (IRGP-UCB) Bayesian optimization with a Monte Carlo validation suite."""

__version__ = "0.1.0"

from .errors import InputError, NumericalError
from .kernel import KernelSpec, eval_kernel, gram_matrix, cross_kernel
from .gp import (
    Posterior,
    fit_posterior,
    predict,
    log_marginal_likelihood,
    optimize_hyperparameters,
    sample_joint,
)
from .confidence import (
    ConfidenceSchedule,
    DomainInfo,
    beta_gpucb,
    irgpucb_params,
    sample_zeta,
    gamma_kappa,
    expected_zeta,
    mgf_at_minus_half,
    discretization_size,
)
from .acquisition import CandidateSet, Policy, ucb_scores, ei_scores, select_next
from .objective import (
    Objective,
    sample_gp_function,
    eval_benchmark,
    load_tabular,
    export_tabular,
    observe,
)

__all__ = [
    "__version__",
    "InputError",
    "NumericalError",
    "KernelSpec",
    "eval_kernel",
    "gram_matrix",
    "cross_kernel",
    "Posterior",
    "fit_posterior",
    "predict",
    "log_marginal_likelihood",
    "optimize_hyperparameters",
    "sample_joint",
    "ConfidenceSchedule",
    "DomainInfo",
    "beta_gpucb",
    "irgpucb_params",
    "sample_zeta",
    "gamma_kappa",
    "expected_zeta",
    "mgf_at_minus_half",
    "discretization_size",
    "CandidateSet",
    "Policy",
    "ucb_scores",
    "ei_scores",
    "select_next",
    "Objective",
    "sample_gp_function",
    "eval_benchmark",
    "load_tabular",
    "export_tabular",
    "observe",
]

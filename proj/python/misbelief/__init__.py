"""Long-run beliefs of an overconfident Bayesian learner in linear-Gaussian models.

Indices are zero-based here, unlike scenario files.
"""

from ._core import (
    BiasReport,
    DogmaticConstraint,
    LimitBelief,
    LinearGaussianModel,
    MisbeliefError,
    Scenario,
    __version__,
    add_group,
    biases_closed_form,
    biases_via_theorem,
    contact_biases,
    convergence_trace,
    corollary_checks,
    correlated_biases,
    example1_biases,
    example2_biases,
    kl_at,
    kl_divergence,
    load_scenario,
    numeric_oracle,
    run_suite,
    sample_signals,
    solve_limit,
)

__all__ = [
    "BiasReport",
    "DogmaticConstraint",
    "LimitBelief",
    "LinearGaussianModel",
    "MisbeliefError",
    "Scenario",
    "__version__",
    "add_group",
    "biases_closed_form",
    "biases_via_theorem",
    "contact_biases",
    "convergence_trace",
    "corollary_checks",
    "correlated_biases",
    "example1_biases",
    "example2_biases",
    "kl_at",
    "kl_divergence",
    "load_scenario",
    "numeric_oracle",
    "run_suite",
    "sample_signals",
    "solve_limit",
]

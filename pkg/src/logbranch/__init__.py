"""Subcritical Markov branching process with logarithmic-mixture reproduction.

The time-t population law has a fully closed form; this package computes it,
cross-checks it against direct integration of the backward equation and
against exact event-driven simulation, and exposes the heavy-tailed discrete
laws (Sibuya family, logarithmic series) that appear as its conditional and
long-time limits.
"""

from .closed_form import (
    DiscreteLaw,
    SignedLog,
    conditional_factorial_moment,
    conditional_law_at,
    conditional_pgf,
    conditional_pmf,
    extinction_prob,
    factorial_moment,
    falling_factorial,
    law_at,
    limit_law,
    limit_law_factorial_moment,
    limit_law_pgf,
    limit_law_pmf,
    pgf_at,
    pgf_complement,
    pmf,
    survival_prob,
    tv_distance,
)
from .distributions import (
    ExtendedSibuya,
    InverseCdfSampler,
    LogSeries,
    Sibuya,
    offspring_sampler,
    stream,
)
from .errors import (
    DomainError,
    NumericalDivergence,
    PopulationCapExceeded,
    PrecisionLoss,
)
from .model import (
    ALPHA_CRITICAL,
    ModelParams,
    OffspringLaw,
    TimePoint,
    critical_alpha,
    infinitesimal_gen,
    offspring_pmf,
    reproduction_pgf,
)
from .simulate import (
    EmpiricalLaw,
    Population,
    SimConfig,
    estimate_law,
    run_replicate,
    simulate_counts,
    step,
)
from .verify import (
    CheckResult,
    Mechanism,
    OdeSolution,
    binary_mechanism,
    check_implicit_solution,
    closed_form_suite,
    convergence_order,
    geometric_mechanism,
    integrate_backward,
    integrate_complement,
    limit_suite,
    linear_mechanism,
    log_mixture_mechanism,
    numeric_conditional_limit,
    ode_suite,
    run_suite,
    standard_mechanisms,
    table1_closed_form,
    table1_suite,
)

__version__ = "0.1.0"

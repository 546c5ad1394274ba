"""Runtime analysis of the (1+1) EA with unbiased mutation on plateau functions.

Four layers that cross-check each other: Monte Carlo simulation (engine),
the exact k-state level chain (levelchain), the brute-force chain over
individual plateau points (individual), and closed-form predictions (theory).
"""

from .bitcore import BitString, PlateauParams, level_of, onemax, plateau_fitness, sample_level_point
from .engine import (
    RunConfig,
    RunResult,
    StartPolicy,
    TrialSummary,
    empirical_tail,
    run_hyper,
    run_once,
    run_trials,
)
from .levelchain import (
    LevelChain,
    absorption_times,
    build,
    check_tail_envelope,
    conditional_stationary,
    gap_bound,
    leading_mass,
    plateau_size,
    spectrum,
    tail,
    tail_curve,
    uniform_level_vector,
)
from .mutation import AlphaDistribution, HyperHeuristicPolicy, OperatorSpec, pmf_of, pr_range, sample_alpha
from .theory import two_level_closed_form, asymptotic_runtime, leading_constant, optimal_gamma, predict, table1

__version__ = "0.1.0"

__all__ = [
    "AlphaDistribution",
    "BitString",
    "HyperHeuristicPolicy",
    "LevelChain",
    "OperatorSpec",
    "PlateauParams",
    "RunConfig",
    "RunResult",
    "StartPolicy",
    "TrialSummary",
    "absorption_times",
    "two_level_closed_form",
    "asymptotic_runtime",
    "build",
    "check_tail_envelope",
    "conditional_stationary",
    "empirical_tail",
    "gap_bound",
    "leading_constant",
    "leading_mass",
    "level_of",
    "onemax",
    "optimal_gamma",
    "plateau_fitness",
    "plateau_size",
    "pmf_of",
    "pr_range",
    "predict",
    "run_hyper",
    "run_once",
    "run_trials",
    "sample_alpha",
    "sample_level_point",
    "spectrum",
    "table1",
    "tail",
    "tail_curve",
    "uniform_level_vector",
    "__version__",
]

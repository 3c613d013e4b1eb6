"""Sorting, dominance and logit equilibrium in multidimensional matching markets."""

__version__ = "0.1.0"
SPEC_VERSION = "1.0"

from .association import CoupleDataset, count_concordance, kruskal_gamma, standard_gammas  # noqa: E402
from .estimation import FitConfig, ParamVector, diagnostics, fit_mle, log_likelihood, simulate_couples  # noqa: E402
from .logit import LogitConfig, comparative_statics, ipf_equilibrium  # noqa: E402
from .market import (  # noqa: E402
    BivariateTable,
    ComplementarityPattern,
    DiscreteMeasure,
    MarketInstance,
    MatchingMeasure,
    Quadratic,
    Tabulated,
    validate_market,
    validate_matching,
)
from .modularity import classify_pn, compare_modularity, double_difference, is_pn_modular  # noqa: E402
from .order import dominates_pn, is_undominated  # noqa: E402
from .planner import brute_force_oracle, solve_planner, verify_prop1  # noqa: E402
from .sorting import check_global_pn, check_weak_pn, check_within_group, exists_global_pn  # noqa: E402

__all__ = [
    "BivariateTable", "ComplementarityPattern", "CoupleDataset", "DiscreteMeasure", "FitConfig",
    "LogitConfig", "MarketInstance", "MatchingMeasure", "ParamVector", "Quadratic", "Tabulated",
    "brute_force_oracle", "check_global_pn", "check_weak_pn", "check_within_group", "classify_pn",
    "comparative_statics", "compare_modularity", "count_concordance", "diagnostics", "dominates_pn",
    "double_difference", "exists_global_pn", "fit_mle", "ipf_equilibrium", "is_pn_modular",
    "is_undominated", "kruskal_gamma", "log_likelihood", "simulate_couples", "solve_planner",
    "standard_gammas", "validate_market", "validate_matching", "verify_prop1",
]

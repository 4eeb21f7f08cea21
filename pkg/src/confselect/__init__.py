"""Conformal screening with finite-sample false discovery rate control.

Wraps any black-box prediction column: ranks each test unit's observable
statistic among labeled calibration scores to get a conformal p-value, then
applies step-up selection so that the expected proportion of selected units
whose outcomes fail to exceed their thresholds stays below the target level.
"""

__version__ = "0.1.0"

from .asymptotics import (
    AsymptoticReport,
    PopulationSample,
    asymptotic_fdr_power,
    empirical_F,
    population_sample_from_scores,
    solve_tstar,
)
from .bh import ErrorMetrics, SelectionResult, bh_select, bh_threshold, metrics
from .dgps import DgpSetting, generate
from .errors import ConfselectError, ContractError, IngestionError
from .pipeline import (
    Dataset,
    SelectionReport,
    ThresholdSpec,
    build_thresholds,
    select,
)
from .pvalues import (
    PValueVector,
    deterministic_pvalue,
    deterministic_pvalues,
    oracle_pvalue,
    oracle_pvalues,
    randomized_pvalue,
    randomized_pvalues,
    same_class_pvalues,
    tie_diagnostics,
)
from .rng import unit_uniforms
from .scores import (
    MonotoneCheckReport,
    ScoreRule,
    check_monotone,
    clipped_score,
    clipped_threshold_score,
    residual_score,
)
from .sim import McConfig, McReport, exchangeable_experiment, monte_carlo

__all__ = [
    "__version__",
    "AsymptoticReport",
    "ConfselectError",
    "ContractError",
    "Dataset",
    "DgpSetting",
    "ErrorMetrics",
    "IngestionError",
    "McConfig",
    "McReport",
    "MonotoneCheckReport",
    "PValueVector",
    "PopulationSample",
    "ScoreRule",
    "SelectionReport",
    "SelectionResult",
    "ThresholdSpec",
    "asymptotic_fdr_power",
    "bh_select",
    "bh_threshold",
    "build_thresholds",
    "check_monotone",
    "clipped_score",
    "clipped_threshold_score",
    "deterministic_pvalue",
    "deterministic_pvalues",
    "empirical_F",
    "exchangeable_experiment",
    "generate",
    "metrics",
    "monte_carlo",
    "oracle_pvalue",
    "oracle_pvalues",
    "population_sample_from_scores",
    "randomized_pvalue",
    "randomized_pvalues",
    "residual_score",
    "same_class_pvalues",
    "select",
    "solve_tstar",
    "tie_diagnostics",
    "unit_uniforms",
]

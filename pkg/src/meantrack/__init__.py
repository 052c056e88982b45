"""Streaming mean tracking under multiple unknown change points."""

from .baselines import (
    BaselineConfig,
    baseline_run,
    constant_threshold_run,
    discounted_mean_run,
    sliding_window_run,
)
from .detector import (
    AnytimeCusum,
    DetectorConfig,
    ProtocolError,
    glr_statistic,
    multiscale_candidates,
    run,
    run_streaming,
    scan,
    threshold,
)
from .environments import (
    RngSpec,
    Scenario,
    gen_adversarial,
    gen_dense,
    gen_linear_in_s,
    gen_main_s5,
    gen_no_change,
    gen_single_change,
    sample_series,
)
from .harness import (
    McSummary,
    Policy,
    RegretReport,
    confounding_gap_check,
    cusum_policy,
    effective_pre_mean,
    monte_carlo,
    oracle_policy,
    regret,
    snr_eff,
    snr_star,
)
from .nab import NabSeries, evaluate_on_nab, parse_nab_csv, reference_means
from .types import (
    Environment,
    RunTrace,
    StepOutcome,
    TimeSeries,
    ValidationError,
    make_environment,
    nominal_gaps,
)
from .vector import VectorAnytimeCusum, vector_glr_statistic, vector_run, vector_threshold

__version__ = "0.1.0"

__all__ = [
    "AnytimeCusum",
    "BaselineConfig",
    "DetectorConfig",
    "Environment",
    "McSummary",
    "NabSeries",
    "Policy",
    "ProtocolError",
    "RegretReport",
    "RngSpec",
    "RunTrace",
    "Scenario",
    "StepOutcome",
    "TimeSeries",
    "ValidationError",
    "VectorAnytimeCusum",
    "baseline_run",
    "confounding_gap_check",
    "constant_threshold_run",
    "cusum_policy",
    "discounted_mean_run",
    "effective_pre_mean",
    "evaluate_on_nab",
    "gen_adversarial",
    "gen_dense",
    "gen_linear_in_s",
    "gen_main_s5",
    "gen_no_change",
    "gen_single_change",
    "glr_statistic",
    "make_environment",
    "monte_carlo",
    "multiscale_candidates",
    "nominal_gaps",
    "oracle_policy",
    "parse_nab_csv",
    "reference_means",
    "regret",
    "run",
    "run_streaming",
    "sample_series",
    "scan",
    "sliding_window_run",
    "snr_eff",
    "snr_star",
    "threshold",
    "vector_glr_statistic",
    "vector_run",
    "vector_threshold",
]

"""Comparison estimators: sliding-window mean, discounted mean, constant-threshold CUSUM.

All baselines predict from X_1..X_{t-1} only (one step of lookback shift
relative to formulas that include X_t), so every policy in the repo is
measurable with respect to the same information set and regret comparisons
are like for like.  The prediction at t = 1 is the configured initial value.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels
from .detector import _coerce_values
from .types import Environment, RunTrace, ValidationError


@dataclass(frozen=True)
class BaselineConfig:
    """Which baseline to run and its single tuning knob."""

    kind: str  # "sliding_window" | "discounted_mean" | "constant_threshold"
    window: Optional[int] = None
    rho: Optional[float] = None
    gamma: Optional[float] = None

    def __post_init__(self):
        if self.kind == "sliding_window":
            if self.window is None or self.window < 1:
                raise ValidationError(f"window must be >= 1, got {self.window}")
        elif self.kind == "discounted_mean":
            if self.rho is None or not (0.0 < self.rho < 1.0):
                raise ValidationError(f"rho must be in (0, 1), got {self.rho}")
        elif self.kind == "constant_threshold":
            if self.gamma is None or not self.gamma > 0:
                raise ValidationError(f"gamma must be positive, got {self.gamma}")
        else:
            raise ValidationError(f"unknown baseline kind {self.kind!r}")


def _estimator_trace(values, preds, environment) -> RunTrace:
    T = values.shape[0]
    return RunTrace(
        predictions=preds,
        statistics=np.full(T, np.nan),
        thresholds=np.full(T, np.nan),
        alarm_flags=np.zeros(T, dtype=np.bool_),
        restarts=np.ones(T, dtype=np.int64),
        environment=environment,
    )


def sliding_window_run(
    stream, window: int, initial_prediction: float = 0.0,
    environment: Environment | None = None,
) -> RunTrace:
    """Predict the average of the last min(window, t-1) observations."""
    if window < 1:
        raise ValidationError(f"window must be >= 1, got {window}")
    x = _coerce_values(stream)
    T = x.shape[0]
    csum = np.concatenate([[0.0], np.cumsum(x)])
    preds = np.empty(T)
    preds[0] = initial_prediction
    t_idx = np.arange(2, T + 1)            # prediction times
    hi = t_idx - 1                          # last available observation
    lo = np.maximum(hi - window, 0)
    preds[1:] = (csum[hi] - csum[lo]) / (hi - lo)
    return _estimator_trace(x, preds, environment)


def discounted_mean_run(
    stream, rho: float, initial_prediction: float = 0.0,
    environment: Environment | None = None,
) -> RunTrace:
    """Exponentially discounted average of past observations.

    Prediction at time t is sum_{i<=t-1} rho^(t-1-i) X_i / sum_{i<=t-1} rho^(t-1-i),
    maintained recursively in O(1) per step.
    """
    if not (0.0 < rho < 1.0):
        raise ValidationError(f"rho must be in (0, 1), got {rho}")
    x = _coerce_values(stream)
    T = x.shape[0]
    preds = np.empty(T)
    preds[0] = initial_prediction
    num = 0.0
    den = 0.0
    for i in range(T - 1):
        num = rho * num + x[i]
        den = rho * den + 1.0
        preds[i + 1] = num / den
    return _estimator_trace(x, preds, environment)


def constant_threshold_run(
    stream, gamma: float, sigma: float, initial_prediction: float = 0.0,
    scan: str = "full", base: float = 2.0,
    environment: Environment | None = None,
) -> RunTrace:
    """The CUSUM tracker with a fixed threshold gamma instead of the anytime one.

    Statistic, restart logic, and predictions are unchanged.  gamma = inf is
    a valid sentinel: no alarms ever fire and the output is the running mean.
    """
    if not gamma > 0:
        raise ValidationError(f"gamma must be positive, got {gamma}")
    if not sigma > 0:
        raise ValidationError(f"sigma must be positive, got {sigma}")
    x = _coerce_values(stream)
    mode = _kernels.SCAN_FULL if scan == "full" else _kernels.SCAN_MULTISCALE
    preds, stats, gammas, alarms, restarts = _kernels.scalar_run(
        x, sigma, 0.5, mode, base, float(gamma), initial_prediction,
    )
    return RunTrace(
        predictions=preds,
        statistics=stats,
        thresholds=gammas,
        alarm_flags=alarms,
        restarts=restarts,
        environment=environment,
    )


def baseline_run(stream, config: BaselineConfig, sigma: float = 1.0, **kw) -> RunTrace:
    if config.kind == "sliding_window":
        return sliding_window_run(stream, config.window, **kw)
    if config.kind == "discounted_mean":
        return discounted_mean_run(stream, config.rho, **kw)
    return constant_threshold_run(stream, config.gamma, sigma, **kw)

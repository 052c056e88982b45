"""Scalar anytime CUSUM tracker.

The detector keeps a prefix-sum array G and a restart time r.  At each time
t it scans all split points r < k < t for the largest standardized
two-sample mean difference

    D(k) = (1/sigma) * sqrt((k-r)(t-k)/(t-r)) * |mean(X_r..X_{k-1}) - mean(X_k..X_{t-1})|

and raises an alarm when the scan maximum reaches the time-varying
threshold

    gamma(t, r) = sqrt(6 log(t-r) + 2 log(1/alpha_r) + 2 log(pi^2/3)),

where alpha_r = 6 alpha / (pi^2 r^2) spreads the error budget alpha over
restart times.  After an alarm the restart moves to t - 1 and the history
before it is discarded.  Predictions are the running average since the
restart.  Natural logarithms throughout.

Canonical evaluation order: D(k) is computed as sqrt(n^2 / (s*q*(t-r))) / sigma
with s = k - r, q = t - k and n = q*(sum of the left block) - s*(sum of the
right block).  This is algebraically identical to the display above, uses a
single division per candidate, and makes the scan maximum exactly the
sqrt of the maximum of the per-candidate squares (sqrt is monotone).
Every code path (streaming class, compiled batch kernel, vector variant)
uses this same order so their outputs agree bitwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .types import Environment, RunTrace, StepOutcome, TimeSeries, ValidationError

TWO_LOG_PI2_OVER_3 = 2.0 * math.log(math.pi * math.pi / 3.0)

SCAN_MODES = ("full", "multiscale")


class ProtocolError(RuntimeError):
    """step()/observe() called out of order."""


@dataclass(frozen=True)
class DetectorConfig:
    """Tracker parameters.

    sigma: sub-Gaussian noise proxy (> 0).
    alpha: total false-alarm budget in (0, 1).
    scan: "full" scans every split point; "multiscale" scans a geometric
        grid of offsets from both ends of the window.
    base: geometric grid base b > 1 (multiscale only).
    initial_prediction: emitted at t = 1, before any data exists.
    """

    sigma: float
    alpha: float = 0.05
    scan: str = "full"
    base: float = 2.0
    initial_prediction: float = 0.0

    def __post_init__(self):
        if not (np.isfinite(self.sigma) and self.sigma > 0):
            raise ValidationError(f"sigma must be positive, got {self.sigma}")
        if not (0.0 < self.alpha < 1.0):
            raise ValidationError(f"alpha must be in (0, 1), got {self.alpha}")
        if self.scan not in SCAN_MODES:
            raise ValidationError(f"scan must be one of {SCAN_MODES}, got {self.scan!r}")
        if self.scan == "multiscale" and not self.base > 1.0:
            raise ValidationError(f"multiscale base must be > 1, got {self.base}")


def restart_budget(alpha: float, r: int) -> float:
    """alpha_r = 6 alpha / (pi^2 r^2)."""
    return 6.0 * alpha / (math.pi * math.pi * r * r)


def threshold(t: int, r: int, alpha_r: float) -> float:
    """Anytime threshold gamma for testing at time t with restart r."""
    if t < r + 1:
        raise ValidationError(f"need t >= r + 1, got t={t}, r={r}")
    if not (0.0 < alpha_r < 1.0):
        raise ValidationError(f"alpha_r must be in (0, 1), got {alpha_r}")
    return math.sqrt(
        6.0 * math.log(t - r) + 2.0 * math.log(1.0 / alpha_r) + TWO_LOG_PI2_OVER_3
    )


def glr_sq_scalefree(prefix, r: int, k: int, t: int) -> float:
    """(sigma * D(k))^2 from prefix sums, in the canonical evaluation order."""
    s = k - r
    q = t - k
    left = prefix[k - 1] - prefix[r - 1]
    right = prefix[t - 1] - prefix[k - 1]
    num = q * left - s * right
    return (num * num) / (s * q * (t - r))


def glr_statistic(prefix, r: int, k: int, t: int, sigma: float) -> float:
    """The two-sample scan statistic D(k) at split k, window (r, t)."""
    if not (r < k < t):
        raise ValidationError(f"split must satisfy r < k < t, got r={r}, k={k}, t={t}")
    return math.sqrt(glr_sq_scalefree(prefix, r, k, t)) / sigma


def multiscale_offsets(span: int, base: float) -> list[int]:
    """Distinct offsets {1, ceil(b), ceil(b^2), ...} strictly below span."""
    offs = []
    v = 1.0
    prev = 0
    while True:
        d = int(math.ceil(v))
        if d >= span:
            break
        if d != prev:
            offs.append(d)
            prev = d
        v *= base
    return offs


def multiscale_candidates(r: int, t: int, base: float) -> list[int]:
    """Sorted distinct split candidates {r + d} U {t - d} over the offset grid."""
    span = t - r
    ks = set()
    for d in multiscale_offsets(span, base):
        ks.add(r + d)
        ks.add(t - d)
    return sorted(ks)


def scan(prefix, r: int, k_candidates, t: int, sigma: float) -> tuple[float, int]:
    """Maximize D(k) over the candidate splits; ties go to the smallest k.

    Returns (max statistic, argmax split).
    """
    best_u = -1.0
    best_k = 0
    for k in k_candidates:
        u = glr_sq_scalefree(prefix, r, k, t)
        if u > best_u:
            best_u = u
            best_k = k
    if best_k == 0:
        raise ValidationError(f"no valid split in ({r}, {t})")
    return math.sqrt(best_u) / sigma, best_k


class AnytimeCusum:
    """Streaming tracker implementing the step()/observe() protocol.

    Usage per time step: call ``step()`` to run the test and obtain the
    prediction for time t, then feed the observation via ``observe(x)``.
    The two calls must alternate strictly; violating the order raises
    ProtocolError.  Single-owner mutable: not safe for concurrent use.
    """

    def __init__(self, config: DetectorConfig):
        self.config = config
        self._prefix: list[float] = [0.0]  # G_0..G_{t-1}
        self._t = 1
        self._r = 1
        self._alpha_r = restart_budget(config.alpha, 1)
        self._awaiting_observation = False

    @property
    def current_time(self) -> int:
        return self._t

    @property
    def restart(self) -> int:
        return self._r

    @property
    def alpha_r(self) -> float:
        return self._alpha_r

    @property
    def prefix_sums(self) -> list[float]:
        return list(self._prefix)

    def glr_statistic(self, k: int) -> float:
        return glr_statistic(self._prefix, self._r, k, self._t, self.config.sigma)

    def _candidates(self) -> list[int]:
        if self.config.scan == "full":
            return list(range(self._r + 1, self._t))
        return multiscale_candidates(self._r, self._t, self.config.base)

    def scan(self) -> tuple[float, int]:
        """(C, argmax k) over the configured candidate set; requires t >= r + 2."""
        if self._t < self._r + 2:
            raise ValidationError(
                f"no split available: t={self._t}, r={self._r} (need t >= r + 2)"
            )
        return scan(self._prefix, self._r, self._candidates(), self._t, self.config.sigma)

    def step(self) -> StepOutcome:
        if self._awaiting_observation:
            raise ProtocolError(f"step() called twice at t={self._t}; observe() is due")
        self._awaiting_observation = True
        t = self._t
        if t == 1:
            return StepOutcome(
                time=1,
                prediction=self.config.initial_prediction,
                statistic=None,
                threshold=None,
                alarm=False,
                restart_before_step=1,
            )
        stat = gam = None
        alarm = False
        if t >= self._r + 2:
            gam = threshold(t, self._r, self._alpha_r)
            stat, _ = self.scan()
            if stat >= gam:
                alarm = True
                self._r = t - 1
                self._alpha_r = restart_budget(self.config.alpha, self._r)
        r = self._r
        pred = (self._prefix[t - 1] - self._prefix[r - 1]) / (t - r)
        return StepOutcome(
            time=t,
            prediction=pred,
            statistic=stat,
            threshold=gam,
            alarm=alarm,
            restart_before_step=r,
        )

    def observe(self, x: float):
        """Append X_t and advance to t + 1."""
        if not self._awaiting_observation:
            raise ProtocolError(f"observe() called twice for t={self._t - 1}")
        x = float(x)
        if not math.isfinite(x):
            raise ValidationError(f"non-finite observation at t={self._t}")
        self._prefix.append(self._prefix[-1] + x)
        self._t += 1
        self._awaiting_observation = False


def _coerce_values(stream) -> np.ndarray:
    if isinstance(stream, TimeSeries):
        return stream.values
    v = np.asarray(stream, dtype=np.float64)
    if v.ndim != 1 or v.shape[0] == 0:
        raise ValidationError(f"expected a nonempty 1-D stream, got shape {v.shape}")
    bad = np.flatnonzero(~np.isfinite(v))
    if bad.size:
        raise ValidationError(f"non-finite observation at t={int(bad[0]) + 1}")
    return v


def run(stream, config: DetectorConfig, environment: Environment | None = None) -> RunTrace:
    """Run the tracker over a whole stream (compiled fast path)."""
    x = _coerce_values(stream)
    mode = _kernels.SCAN_FULL if config.scan == "full" else _kernels.SCAN_MULTISCALE
    preds, stats, gammas, alarms, restarts = _kernels.scalar_run(
        x,
        config.sigma,
        config.alpha,
        mode,
        config.base,
        np.nan,
        config.initial_prediction,
    )
    return RunTrace(
        predictions=preds,
        statistics=stats,
        thresholds=gammas,
        alarm_flags=alarms,
        restarts=restarts,
        environment=environment,
    )


def run_streaming(stream, config: DetectorConfig, environment: Environment | None = None) -> RunTrace:
    """Reference path: same contract as run(), via the streaming class."""
    x = _coerce_values(stream)
    det = AnytimeCusum(config)
    T = x.shape[0]
    preds = np.empty(T)
    stats = np.full(T, np.nan)
    gammas = np.full(T, np.nan)
    alarms = np.zeros(T, dtype=np.bool_)
    restarts = np.empty(T, dtype=np.int64)
    for i in range(T):
        out = det.step()
        preds[i] = out.prediction
        if out.statistic is not None:
            stats[i] = out.statistic
            gammas[i] = out.threshold
        alarms[i] = out.alarm
        restarts[i] = out.restart_before_step
        det.observe(x[i])
    return RunTrace(
        predictions=preds,
        statistics=stats,
        thresholds=gammas,
        alarm_flags=alarms,
        restarts=restarts,
        environment=environment,
    )

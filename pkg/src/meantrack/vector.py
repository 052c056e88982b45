"""Vector-valued tracker: L2-norm scan statistic, dimension-inflated threshold.

The statistic replaces the absolute mean difference with the Euclidean norm
of the mean-difference vector; the restart logic is unchanged.  The default
threshold adds sqrt(d) to the scalar form to account for d-dimensional
concentration:

    gamma(t, r, d) = sqrt(d) + sqrt(6 log(t-r) + 2 log(1/alpha_r) + 2 log(pi^2/3)).

At d = 1 the two threshold forms differ by exactly +1; neither is canonical,
so ``scalar_threshold=True`` substitutes the scalar form (and then a d = 1
run reproduces the scalar tracker bitwise).
"""

from __future__ import annotations

import math

import numpy as np

from .detector import DetectorConfig, ProtocolError, multiscale_candidates, restart_budget
from .detector import threshold as scalar_threshold_fn
from .types import Environment, RunTrace, StepOutcome, TimeSeries, ValidationError


def vector_threshold(t: int, r: int, alpha_r: float, d: int) -> float:
    """Anytime threshold for the d-dimensional statistic."""
    if d < 1:
        raise ValidationError(f"dimension must be >= 1, got {d}")
    return math.sqrt(d) + scalar_threshold_fn(t, r, alpha_r)


def vector_glr_sq_scalefree(prefix: np.ndarray, r: int, k: int, t: int) -> float:
    """(sigma * D(k))^2 for vector prefix sums, canonical evaluation order."""
    s = k - r
    q = t - k
    left = prefix[k - 1] - prefix[r - 1]
    right = prefix[t - 1] - prefix[k - 1]
    num = q * left - s * right
    return float(num @ num) / (s * q * (t - r))


def vector_glr_statistic(prefix: np.ndarray, r: int, k: int, t: int, sigma: float) -> float:
    """L2-norm two-sample scan statistic at split k, window (r, t)."""
    if not (r < k < t):
        raise ValidationError(f"split must satisfy r < k < t, got r={r}, k={k}, t={t}")
    return math.sqrt(vector_glr_sq_scalefree(prefix, r, k, t)) / sigma


class VectorAnytimeCusum:
    """d-dimensional streaming tracker; same step()/observe() protocol as the scalar one.

    ``component_ops`` counts vector components touched by candidate
    evaluations, exposing the O(d) per-candidate cost.
    """

    def __init__(self, config: DetectorConfig, dimension: int, scalar_threshold: bool = False):
        if dimension < 1:
            raise ValidationError(f"dimension must be >= 1, got {dimension}")
        self.config = config
        self.dimension = dimension
        self.use_scalar_threshold = scalar_threshold
        self._prefix = [np.zeros(dimension)]  # G_0..G_{t-1}, each an R^d point
        self._t = 1
        self._r = 1
        self._alpha_r = restart_budget(config.alpha, 1)
        self._awaiting_observation = False
        self.component_ops = 0

    @property
    def current_time(self) -> int:
        return self._t

    @property
    def restart(self) -> int:
        return self._r

    @property
    def prefix_sums(self) -> np.ndarray:
        return np.vstack(self._prefix)

    def glr_statistic(self, k: int) -> float:
        if not (self._r < k < self._t):
            raise ValidationError(
                f"split must satisfy r < k < t, got r={self._r}, k={k}, t={self._t}"
            )
        return self._stat_at(k)

    def _stat_at(self, k: int) -> float:
        return math.sqrt(self._sq_at(k)) / self.config.sigma

    def _sq_at(self, k: int) -> float:
        r, t = self._r, self._t
        s = k - r
        q = t - k
        Gp = self._prefix
        left = Gp[k - 1] - Gp[r - 1]
        right = Gp[t - 1] - Gp[k - 1]
        num = q * left - s * right
        self.component_ops += self.dimension
        return float(num @ num) / (s * q * (t - r))

    def _candidates(self) -> list[int]:
        if self.config.scan == "full":
            return list(range(self._r + 1, self._t))
        return multiscale_candidates(self._r, self._t, self.config.base)

    def scan(self) -> tuple[float, int]:
        if self._t < self._r + 2:
            raise ValidationError(
                f"no split available: t={self._t}, r={self._r} (need t >= r + 2)"
            )
        best_u = -1.0
        best_k = 0
        for k in self._candidates():
            u = self._sq_at(k)
            if u > best_u:
                best_u = u
                best_k = k
        return math.sqrt(best_u) / self.config.sigma, best_k

    def _threshold(self, t: int) -> float:
        if self.use_scalar_threshold:
            return scalar_threshold_fn(t, self._r, self._alpha_r)
        return vector_threshold(t, self._r, self._alpha_r, self.dimension)

    def step(self) -> StepOutcome:
        if self._awaiting_observation:
            raise ProtocolError(f"step() called twice at t={self._t}; observe() is due")
        self._awaiting_observation = True
        t = self._t
        if t == 1:
            pred = np.full(self.dimension, self.config.initial_prediction)
            return StepOutcome(
                time=1, prediction=pred, statistic=None, threshold=None,
                alarm=False, restart_before_step=1,
            )
        stat = gam = None
        alarm = False
        if t >= self._r + 2:
            gam = self._threshold(t)
            stat, _ = self.scan()
            if stat >= gam:
                alarm = True
                self._r = t - 1
                self._alpha_r = restart_budget(self.config.alpha, self._r)
        r = self._r
        pred = (self._prefix[t - 1] - self._prefix[r - 1]) / (t - r)
        return StepOutcome(
            time=t, prediction=pred, statistic=stat, threshold=gam,
            alarm=alarm, restart_before_step=r,
        )

    def observe(self, x):
        if not self._awaiting_observation:
            raise ProtocolError(f"observe() called twice for t={self._t - 1}")
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.dimension,):
            raise ValidationError(
                f"expected a vector of dimension {self.dimension}, got shape {x.shape}"
            )
        if not np.all(np.isfinite(x)):
            raise ValidationError(f"non-finite observation at t={self._t}")
        self._prefix.append(self._prefix[-1] + x)
        self._t += 1
        self._awaiting_observation = False


def vector_run(
    stream,
    config: DetectorConfig,
    dimension: int | None = None,
    scalar_threshold: bool = False,
    environment: Environment | None = None,
) -> RunTrace:
    """Run the vector tracker over a (T, d) stream."""
    x = stream.values if isinstance(stream, TimeSeries) else np.asarray(stream, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2 or x.shape[0] == 0:
        raise ValidationError(f"expected a nonempty (T, d) stream, got shape {x.shape}")
    d = x.shape[1]
    if dimension is not None and dimension != d:
        raise ValidationError(f"dimension mismatch: stream has d={d}, requested {dimension}")
    bad = np.flatnonzero(~np.isfinite(x).all(axis=1))
    if bad.size:
        raise ValidationError(f"non-finite observation at t={int(bad[0]) + 1}")

    det = VectorAnytimeCusum(config, d, scalar_threshold=scalar_threshold)
    T = x.shape[0]
    preds = np.empty((T, d))
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

"""Core domain types shared by every module.

Time indexing convention, stated once: all public interfaces use 1-based
time t = 1..T (change points, restart times, alarm times, split points).
Arrays are stored 0-based; index i holds the quantity for time t = i + 1.
Prefix sums are the one exception: G[i] is the sum of the first i
observations, so G has T + 1 entries and G[0] = 0.
"""

from __future__ import annotations

import json
from bisect import bisect_right
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence, Union

import numpy as np

MeanValue = Union[float, np.ndarray]


class ValidationError(ValueError):
    """An input violates a documented invariant."""


def _as_mean_tuple(segment_means) -> tuple:
    """Normalize segment means to a tuple of floats or tuple of float-tuples."""
    out = []
    vector = None
    for m in segment_means:
        if np.isscalar(m) or isinstance(m, (int, float, np.floating, np.integer)):
            if vector is True:
                raise ValidationError("segment_means mixes scalars and vectors")
            vector = False
            out.append(float(m))
        else:
            if vector is False:
                raise ValidationError("segment_means mixes scalars and vectors")
            vector = True
            out.append(tuple(float(v) for v in m))
    if vector:
        dims = {len(m) for m in out}
        if len(dims) > 1:
            raise ValidationError("segment_means have inconsistent dimensions")
    return tuple(out)


@dataclass(frozen=True)
class Environment:
    """A piecewise-constant mean specification.

    ``change_points`` are the 1-based times tau_1 < ... < tau_S at which the
    mean jumps; with sentinels tau_0 = 1 and tau_{S+1} = T + 1 the segments
    [tau_j, tau_{j+1}) partition [1, T].  ``segment_means`` holds the S + 1
    per-segment means (floats, or equal-length tuples in the vector case).
    ``sigma`` is the sub-Gaussian noise proxy; sigma = 0 denotes a noiseless
    (degenerate) environment, useful for tests.  ``diameter_bound`` is
    optional analysis metadata: an upper bound on max |mu_u - mu_v|; no
    algorithm consumes it.
    """

    change_points: tuple[int, ...]
    segment_means: tuple
    horizon: int
    sigma: float
    diameter_bound: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "change_points", tuple(int(c) for c in self.change_points))
        object.__setattr__(self, "segment_means", _as_mean_tuple(self.segment_means))
        object.__setattr__(self, "horizon", int(self.horizon))
        object.__setattr__(self, "sigma", float(self.sigma))
        if self.horizon < 1:
            raise ValidationError(f"horizon must be >= 1, got {self.horizon}")
        cps = self.change_points
        for a, b in zip(cps, cps[1:]):
            if a >= b:
                raise ValidationError(f"change_points must be strictly increasing, got {a} then {b}")
        for c in cps:
            if not (2 <= c <= self.horizon):
                raise ValidationError(f"change point {c} outside [2, T={self.horizon}]")
        if len(self.segment_means) != len(cps) + 1:
            raise ValidationError(
                f"need len(segment_means) == len(change_points) + 1, "
                f"got {len(self.segment_means)} vs {len(cps)} change points"
            )
        if not np.isfinite(self.sigma) or self.sigma < 0:
            raise ValidationError(f"sigma must be finite and >= 0, got {self.sigma}")
        means = self.means_array
        if not np.all(np.isfinite(means)):
            raise ValidationError("segment_means must be finite")
        if self.diameter_bound is not None:
            object.__setattr__(self, "diameter_bound", float(self.diameter_bound))
            if self.diameter_bound <= 0:
                raise ValidationError("diameter_bound must be positive when set")
            if self.mean_diameter() > self.diameter_bound:
                raise ValidationError(
                    f"mean diameter {self.mean_diameter():g} exceeds diameter_bound "
                    f"{self.diameter_bound:g}"
                )

    @property
    def num_changes(self) -> int:
        return len(self.change_points)

    @property
    def dimension(self) -> int:
        first = self.segment_means[0]
        return 1 if isinstance(first, float) else len(first)

    @property
    def means_array(self) -> np.ndarray:
        """Segment means as an array of shape (S+1,) or (S+1, d)."""
        return np.asarray(self.segment_means, dtype=np.float64)

    def boundaries(self) -> tuple[int, ...]:
        """tau_0 = 1, tau_1, ..., tau_S, tau_{S+1} = T + 1."""
        return (1,) + self.change_points + (self.horizon + 1,)

    def segment_lengths(self) -> tuple[int, ...]:
        b = self.boundaries()
        return tuple(b[j + 1] - b[j] for j in range(len(b) - 1))

    def segment_index(self, t: int) -> int:
        """The unique j with tau_j <= t < tau_{j+1}."""
        if not (1 <= t <= self.horizon):
            raise ValidationError(f"time {t} outside [1, T={self.horizon}]")
        return bisect_right(self.change_points, t)

    def mean_at(self, t: int) -> MeanValue:
        """mu_t, the segment mean in force at time t."""
        m = self.segment_means[self.segment_index(t)]
        return m if isinstance(m, float) else np.asarray(m)

    def mean_series(self) -> np.ndarray:
        """mu_1..mu_T as an array of shape (T,) or (T, d)."""
        return np.repeat(self.means_array, self.segment_lengths(), axis=0)

    def mean_diameter(self) -> float:
        """max over segment pairs of |mu_u - mu_v| (L2 norm in the vector case)."""
        m = self.means_array
        if m.ndim == 1:
            return float(m.max() - m.min())
        diffs = m[:, None, :] - m[None, :, :]
        return float(np.sqrt((diffs * diffs).sum(axis=-1)).max())

    def to_json(self) -> str:
        means = [list(m) if not isinstance(m, float) else m for m in self.segment_means]
        return json.dumps(
            {
                "change_points": list(self.change_points),
                "segment_means": means,
                "horizon": self.horizon,
                "sigma": self.sigma,
                "diameter_bound": self.diameter_bound,
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "Environment":
        raw = json.loads(text)
        return cls(
            change_points=tuple(raw["change_points"]),
            segment_means=raw["segment_means"],
            horizon=raw["horizon"],
            sigma=raw["sigma"],
            diameter_bound=raw.get("diameter_bound"),
        )


def make_environment(
    change_points: Sequence[int],
    segment_means: Sequence,
    horizon: int,
    sigma: float,
    diameter_bound: Optional[float] = None,
) -> Environment:
    """Validated public constructor.

    Stricter than the dataclass itself in one respect: sigma must be
    strictly positive here (generators may build degenerate sigma = 0
    environments directly for noiseless tests).
    """
    if not np.isfinite(sigma) or sigma <= 0:
        raise ValidationError(f"sigma must be positive, got {sigma}")
    return Environment(
        change_points=tuple(change_points),
        segment_means=tuple(segment_means) if not isinstance(segment_means, tuple) else segment_means,
        horizon=horizon,
        sigma=sigma,
        diameter_bound=diameter_bound,
    )


def nominal_gaps(env: Environment) -> np.ndarray:
    """Per-change jump sizes Delta_j = |mu_j - mu_{j-1}| (L2 norm for vectors), j = 1..S."""
    m = env.means_array
    d = np.diff(m, axis=0)
    if d.ndim == 1:
        return np.abs(d)
    return np.sqrt((d * d).sum(axis=-1))


@dataclass(frozen=True)
class TimeSeries:
    """An observed stream X_1..X_T, scalar (T,) or vector (T, d)."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim not in (1, 2):
            raise ValidationError(f"values must be 1-D or 2-D, got shape {v.shape}")
        if v.shape[0] == 0:
            raise ValidationError("empty series")
        bad = np.flatnonzero(~np.isfinite(v).reshape(v.shape[0], -1).all(axis=1))
        if bad.size:
            raise ValidationError(f"non-finite observation at t={int(bad[0]) + 1}")
        object.__setattr__(self, "values", v)

    def __len__(self) -> int:
        return self.values.shape[0]

    @property
    def dimension(self) -> int:
        return 1 if self.values.ndim == 1 else self.values.shape[1]


@dataclass(frozen=True)
class StepOutcome:
    """What the tracker did at one time step.

    ``statistic`` and ``threshold`` are None when the step performed no test
    (fewer than two observations since the restart).  ``restart_before_step``
    is the restart time r used for the prediction, i.e. after any alarm
    raised at this same step.
    """

    time: int
    prediction: MeanValue
    statistic: Optional[float]
    threshold: Optional[float]
    alarm: bool
    restart_before_step: int


@dataclass(frozen=True)
class RunTrace:
    """Full per-run log: one entry per time step, stored as arrays.

    ``statistics``/``thresholds`` are NaN at steps where no test ran.
    ``restarts[i]`` is the restart r used for the prediction at time i + 1.
    """

    predictions: np.ndarray
    statistics: np.ndarray
    thresholds: np.ndarray
    alarm_flags: np.ndarray
    restarts: np.ndarray
    environment: Optional[Environment] = None

    @property
    def horizon(self) -> int:
        return self.predictions.shape[0]

    @property
    def alarms(self) -> list[int]:
        """1-based alarm times."""
        return [int(i) + 1 for i in np.flatnonzero(self.alarm_flags)]

    @property
    def num_blocks(self) -> int:
        """K = number of alarms + 1."""
        return len(self.alarms) + 1

    @property
    def restart_sequence(self) -> list[int]:
        """r_0 = 1 followed by t - 1 for each alarm time t."""
        return [1] + [t - 1 for t in self.alarms]

    def restart_before(self, t: int) -> int:
        """The restart in force when step t began (before any alarm at t)."""
        if not (1 <= t <= self.horizon):
            raise ValidationError(f"time {t} outside [1, T={self.horizon}]")
        return 1 if t == 1 else int(self.restarts[t - 2])

    def with_environment(self, env: Environment) -> "RunTrace":
        return RunTrace(
            predictions=self.predictions,
            statistics=self.statistics,
            thresholds=self.thresholds,
            alarm_flags=self.alarm_flags,
            restarts=self.restarts,
            environment=env,
        )

    @property
    def outcomes(self) -> list[StepOutcome]:
        out = []
        for i in range(self.horizon):
            s = float(self.statistics[i])
            g = float(self.thresholds[i])
            pred = self.predictions[i]
            out.append(
                StepOutcome(
                    time=i + 1,
                    prediction=float(pred) if np.ndim(pred) == 0 else np.asarray(pred),
                    statistic=None if np.isnan(s) else s,
                    threshold=None if np.isnan(g) else g,
                    alarm=bool(self.alarm_flags[i]),
                    restart_before_step=int(self.restarts[i]),
                )
            )
        return out

    def __iter__(self) -> Iterator[StepOutcome]:
        return iter(self.outcomes)

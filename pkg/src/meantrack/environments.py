"""Seeded synthetic environments for the experiment suite.

All randomness comes from numpy's default PCG64 generator; a given
(algorithm id, seed) pair yields the same stream on every platform.  Noise
is always drawn as T standard normals, independent of the mean
construction, so sweeping a structural parameter (e.g. the number of
changes) under a fixed seed reuses the identical noise path.  Natural
logarithms throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .types import Environment, TimeSeries, ValidationError

RNG_ALGORITHM = "numpy-default-pcg64"

# Five changes at fixed horizon fractions; the third segment lasts exactly
# 10 steps, a short-lived regime that tends to be missed.
MAIN_S5_MEANS = (0.0, 2.0, 0.5, 2.5, -1.5, 1.5)


@dataclass(frozen=True)
class RngSpec:
    """Reproducibility contract: replication i uses seed base_seed + i."""

    base_seed: int
    algorithm_id: str = RNG_ALGORITHM

    def generator(self, replication: int = 0) -> np.random.Generator:
        if self.algorithm_id != RNG_ALGORITHM:
            raise ValidationError(f"unknown rng algorithm {self.algorithm_id!r}")
        return np.random.default_rng(self.base_seed + replication)


def sample_series(env: Environment, rng: np.random.Generator) -> TimeSeries:
    """Draw X_t = mu_t + sigma * Z_t with Z_t iid standard normal."""
    mu = env.mean_series()
    z = rng.standard_normal(mu.shape)
    return TimeSeries(mu + env.sigma * z)


def even_partition(T: int, num_segments: int) -> list[int]:
    """Segment lengths as equal as possible (differ by at most 1, long ones first)."""
    base, extra = divmod(T, num_segments)
    if base == 0:
        raise ValidationError(f"cannot split T={T} into {num_segments} nonempty segments")
    return [base + 1] * extra + [base] * (num_segments - extra)


def _change_points_from_lengths(lengths: list[int]) -> tuple[int, ...]:
    cps = []
    t = 1
    for n in lengths[:-1]:
        t += n
        cps.append(t)
    return tuple(cps)


def alternating_means(num_changes: int, amplitude: float) -> tuple[float, ...]:
    """0 on even segments, amplitude on odd ones; every jump has size amplitude."""
    return tuple(0.0 if j % 2 == 0 else amplitude for j in range(num_changes + 1))


def gen_main_s5(T: int, sigma: float = 1.0, rng: np.random.Generator | None = None):
    """The five-change benchmark environment at fixed horizon fractions."""
    if T < 100:
        raise ValidationError(f"T={T} too small for distinct ordered change points")
    tau2 = math.floor(0.4 * T) + 1
    cps = (
        math.floor(0.2 * T) + 1,
        tau2,
        tau2 + 10,
        math.floor(0.75 * T) + 1,
        math.floor(0.9 * T) + 1,
    )
    env = Environment(change_points=cps, segment_means=MAIN_S5_MEANS, horizon=T, sigma=sigma)
    rng = np.random.default_rng() if rng is None else rng
    return env, sample_series(env, rng)


def calibrated_amplitude(T: int, num_changes: int, c: float, sigma: float) -> float:
    """Jump size sqrt(c sigma^2 log(a) / a) with a = T / (S + 1) the segment scale."""
    a = T / (num_changes + 1)
    if a <= 1.0:
        raise ValidationError(f"segments too short: T={T}, S={num_changes}")
    return math.sqrt(c * sigma * sigma * math.log(a) / a)


def gen_dense(T: int, delta_exponent: float, sigma: float = 1.0,
              rng: np.random.Generator | None = None):
    """Changes growing with the horizon: S(T) = floor(T^delta / log T).

    Segments are evenly partitioned, means alternate between 0 and a
    calibrated amplitude that keeps each shift near the detection boundary.
    """
    if T < 10:
        raise ValidationError(f"T={T} too small")
    S = int(T ** delta_exponent / math.log(T))
    amp = calibrated_amplitude(T, S, 160.0, sigma)
    lengths = even_partition(T, S + 1)
    env = Environment(
        change_points=_change_points_from_lengths(lengths),
        segment_means=alternating_means(S, amp),
        horizon=T,
        sigma=sigma,
    )
    rng = np.random.default_rng() if rng is None else rng
    return env, sample_series(env, rng)


def gen_adversarial(T: int, S: int, c: float, sigma: float = 1.0,
                    rng: np.random.Generator | None = None):
    """S evenly spaced changes alternating between 0 and a calibrated amplitude.

    c controls difficulty: c = 160 places shifts near the missed-detection
    boundary, larger c makes them easy to detect but costlier to miss.
    """
    if S < 0:
        raise ValidationError(f"S must be >= 0, got {S}")
    if c <= 0:
        raise ValidationError(f"c must be positive, got {c}")
    amp = calibrated_amplitude(T, S, c, sigma) if S > 0 else 0.0
    lengths = even_partition(T, S + 1)
    env = Environment(
        change_points=_change_points_from_lengths(lengths),
        segment_means=alternating_means(S, amp),
        horizon=T,
        sigma=sigma,
    )
    rng = np.random.default_rng() if rng is None else rng
    return env, sample_series(env, rng)


def gen_single_change(T: int, tau1: int = 50, jump: float = 0.75, sigma: float = 1.0,
                      rng: np.random.Generator | None = None):
    """Mean 0 before tau1, ``jump`` from tau1 on."""
    if not (2 <= tau1 <= T):
        raise ValidationError(f"tau1={tau1} outside [2, T={T}]")
    env = Environment(
        change_points=(tau1,), segment_means=(0.0, jump), horizon=T, sigma=sigma
    )
    rng = np.random.default_rng() if rng is None else rng
    return env, sample_series(env, rng)


def gen_linear_in_s(T: int, S: int, sigma: float = 1.0,
                    rng: np.random.Generator | None = None):
    """Fixed horizon, varying change count; same calibrated alternating construction."""
    return gen_adversarial(T, S, 160.0, sigma=sigma, rng=rng)


def gen_no_change(T: int, mean: float = 0.0, sigma: float = 1.0,
                  rng: np.random.Generator | None = None):
    """Single stationary segment; every alarm on it is a false alarm."""
    env = Environment(change_points=(), segment_means=(mean,), horizon=T, sigma=sigma)
    rng = np.random.default_rng() if rng is None else rng
    return env, sample_series(env, rng)


@dataclass(frozen=True)
class Scenario:
    """A named (horizon, rng) -> (Environment, TimeSeries) recipe."""

    name: str
    build: Callable[[int, np.random.Generator], tuple[Environment, TimeSeries]]


def scenario_main_s5(sigma: float = 1.0) -> Scenario:
    return Scenario("main-s5", lambda T, rng: gen_main_s5(T, sigma, rng))


def scenario_dense(delta_exponent: float, sigma: float = 1.0) -> Scenario:
    return Scenario(
        f"dense-{delta_exponent:g}",
        lambda T, rng: gen_dense(T, delta_exponent, sigma, rng),
    )


def scenario_adversarial(S: int = 5, c: float = 160.0, sigma: float = 1.0) -> Scenario:
    return Scenario(
        f"adversarial-S{S}-c{c:g}",
        lambda T, rng: gen_adversarial(T, S, c, sigma, rng),
    )


def scenario_single_change(tau1: int = 50, jump: float = 0.75, sigma: float = 1.0) -> Scenario:
    return Scenario(
        "single-change",
        lambda T, rng: gen_single_change(T, tau1, jump, sigma, rng),
    )


def scenario_linear_in_s(S: int, sigma: float = 1.0) -> Scenario:
    return Scenario(f"linear-in-s-{S}", lambda T, rng: gen_linear_in_s(T, S, sigma, rng))


def scenario_no_change(mean: float = 0.0, sigma: float = 1.0) -> Scenario:
    return Scenario("no-change", lambda T, rng: gen_no_change(T, mean, sigma, rng))

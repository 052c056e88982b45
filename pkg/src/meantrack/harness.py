"""Regret computation, alarm accounting, Monte Carlo aggregation, SNR diagnostics.

Regret is the cumulative squared prediction error from t = 2 (the t = 1
prediction precedes any data and is excluded).  An alarm is classified
against the restart r that was in force when it fired: it detects the most
recent change in the open window (r, t) if that change has not been
credited yet; otherwise it is a false alarm.  Each change can be credited
at most once.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from . import baselines as _baselines
from . import detector as _detector
from .environments import Scenario
from .types import Environment, RunTrace, ValidationError


@dataclass(frozen=True)
class RegretReport:
    """Per-run regret and alarm accounting."""

    cumulative_regret: float
    num_alarms: int
    num_false_alarms: int
    num_missed: int
    per_step: Optional[np.ndarray] = None  # partial sums over t = 2..T, length T

    @property
    def num_detections(self) -> int:
        return self.num_alarms - self.num_false_alarms

    def per_step_rows(self):
        """(t, cumulative regret) pairs; needs per_step=True at computation."""
        if self.per_step is None:
            raise ValidationError("report was computed without per_step=True")
        for i, value in enumerate(self.per_step):
            yield i + 1, float(value)


def write_per_step_csv(report: RegretReport, path) -> None:
    """Write the cumulative regret path as `t,cum_regret`."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "cum_regret"])
        w.writerows((t, repr(v)) for t, v in report.per_step_rows())


def squared_errors(trace: RunTrace, env: Environment) -> np.ndarray:
    """Per-step squared prediction error (squared L2 norm in the vector case)."""
    if trace.horizon != env.horizon:
        raise ValidationError(
            f"trace horizon {trace.horizon} != environment horizon {env.horizon}"
        )
    err = trace.predictions - env.mean_series()
    if err.ndim == 1:
        return err * err
    return (err * err).sum(axis=1)


def classify_alarms(trace: RunTrace, env: Environment) -> tuple[int, np.ndarray]:
    """(number of false alarms, per-change detected mask).

    An alarm at t with pre-alarm restart r is a candidate detection of the
    largest tau_j in (r, t); with no change in that window, or with that
    change already credited, it is a false alarm.
    """
    detected = np.zeros(env.num_changes, dtype=bool)
    alarm_idx = np.flatnonzero(trace.alarm_flags)
    if alarm_idx.size == 0:
        return 0, detected
    t_arr = alarm_idx + 1
    # pre-alarm restart: the r recorded at the previous step
    r_arr = trace.restarts[alarm_idx - 1]
    if env.num_changes == 0:
        return int(alarm_idx.size), detected
    cps = np.asarray(env.change_points, dtype=np.int64)
    j_hi = np.searchsorted(cps, t_arr, side="left")  # count of tau_j < t
    valid = j_hi >= 1
    last_tau = cps[np.maximum(j_hi - 1, 0)]
    valid &= last_tau > r_arr
    credited = np.unique(j_hi[valid])  # a change is credited at most once
    detected[credited - 1] = True
    return int(alarm_idx.size - credited.size), detected


def regret(trace: RunTrace, env: Environment | None = None, per_step: bool = False) -> RegretReport:
    """Evaluate a trace against its environment."""
    env = env if env is not None else trace.environment
    if env is None:
        raise ValidationError("trace has no environment attached; pass one explicitly")
    sq = squared_errors(trace, env)
    sq = sq.copy()
    sq[0] = 0.0  # t = 1 excluded
    fa, detected = classify_alarms(trace, env)
    return RegretReport(
        cumulative_regret=float(sq.sum()),
        num_alarms=len(trace.alarms),
        num_false_alarms=fa,
        num_missed=int(env.num_changes - detected.sum()),
        per_step=np.cumsum(sq) if per_step else None,
    )


# ---------------------------------------------------------------------------
# Policies: anything mapping (values, environment) -> RunTrace.


@dataclass(frozen=True)
class Policy:
    name: str
    run: Callable[[np.ndarray, Optional[Environment]], RunTrace]


def cusum_policy(sigma: float, alpha: float = 0.05, scan: str = "full",
                 base: float = 2.0, name: str | None = None) -> Policy:
    cfg = _detector.DetectorConfig(sigma=sigma, alpha=alpha, scan=scan, base=base)
    if name is None:
        name = "cusum" if scan == "full" else f"cusum-multiscale-b{base:g}"
    return Policy(name, lambda x, env: _detector.run(x, cfg, environment=env))


def sliding_window_policy(window: int) -> Policy:
    return Policy(
        f"sw-{window}",
        lambda x, env: _baselines.sliding_window_run(x, window, environment=env),
    )


def discounted_mean_policy(rho: float) -> Policy:
    return Policy(
        f"dm-{rho:g}",
        lambda x, env: _baselines.discounted_mean_run(x, rho, environment=env),
    )


def constant_threshold_policy(gamma: float, sigma: float) -> Policy:
    return Policy(
        f"const-{gamma:g}",
        lambda x, env: _baselines.constant_threshold_run(x, gamma, sigma, environment=env),
    )


def oracle_policy() -> Policy:
    """Predicts the true mean; zero regret by construction."""

    def run(x, env):
        if env is None:
            raise ValidationError("oracle policy needs an environment")
        mu = env.mean_series()
        T = mu.shape[0]
        return RunTrace(
            predictions=mu.copy(),
            statistics=np.full(T, np.nan),
            thresholds=np.full(T, np.nan),
            alarm_flags=np.zeros(T, dtype=np.bool_),
            restarts=np.ones(T, dtype=np.int64),
            environment=env,
        )

    return Policy("oracle", run)


# ---------------------------------------------------------------------------
# Monte Carlo aggregation.


@dataclass(frozen=True)
class McSummary:
    """Mean regret with a 95% normal confidence interval per horizon."""

    horizons: tuple[int, ...]
    mean_regret: np.ndarray
    stderr: np.ndarray
    ci_halfwidth: np.ndarray  # 1.96 * stderr
    n_reps: int

    def rows(self):
        for i, T in enumerate(self.horizons):
            yield {
                "T": T,
                "mean_regret": float(self.mean_regret[i]),
                "stderr": float(self.stderr[i]),
                "ci_halfwidth": float(self.ci_halfwidth[i]),
                "n_reps": self.n_reps,
            }


@dataclass(frozen=True)
class RepMetrics:
    """Per-replication metrics for one (scenario, policy, horizon) cell."""

    regret: np.ndarray
    false_alarms: np.ndarray
    alarms: np.ndarray
    detections: np.ndarray


def _one_rep(scenario: Scenario, policy: Policy, T: int, seed: int):
    rng = np.random.default_rng(seed)
    env, series = scenario.build(T, rng)
    trace = policy.run(series.values, env)
    rep = regret(trace, env)
    return rep.cumulative_regret, rep.num_false_alarms, rep.num_alarms, rep.num_detections


def replicate(scenario: Scenario, policy: Policy, T: int, n_reps: int,
              base_seed: int, threads: int | None = None) -> RepMetrics:
    """Independent replications with seeds base_seed + i; order-stable output."""
    if n_reps < 1:
        raise ValidationError(f"n_reps must be >= 1, got {n_reps}")
    seeds = [base_seed + i for i in range(n_reps)]
    if threads is not None and threads <= 1:
        results = [_one_rep(scenario, policy, T, s) for s in seeds]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda s: _one_rep(scenario, policy, T, s), seeds))
    arr = np.asarray(results, dtype=np.float64)
    return RepMetrics(
        regret=arr[:, 0],
        false_alarms=arr[:, 1],
        alarms=arr[:, 2],
        detections=arr[:, 3],
    )


def mean_and_stderr(samples: np.ndarray) -> tuple[float, float]:
    n = samples.shape[0]
    m = float(samples.mean())
    if n < 2:
        return m, 0.0
    return m, float(samples.std(ddof=1) / math.sqrt(n))


def monte_carlo(scenario: Scenario, policy: Policy, horizons: Sequence[int],
                n_reps: int, base_seed: int, threads: int | None = None) -> McSummary:
    """Mean regret across replications for each horizon in the grid."""
    if n_reps < 2:
        raise ValidationError(f"n_reps must be >= 2, got {n_reps}")
    means = np.empty(len(horizons))
    errs = np.empty(len(horizons))
    for i, T in enumerate(horizons):
        metrics = replicate(scenario, policy, T, n_reps, base_seed, threads)
        means[i], errs[i] = mean_and_stderr(metrics.regret)
    return McSummary(
        horizons=tuple(int(T) for T in horizons),
        mean_regret=means,
        stderr=errs,
        ci_halfwidth=1.96 * errs,
        n_reps=n_reps,
    )


# ---------------------------------------------------------------------------
# Population SNR and confounding diagnostics.


def snr_star(env: Environment, j: int, t: int) -> float:
    """Detection SNR for change j at time t under an ideal restart at tau_{j-1}."""
    b = env.boundaries()
    if not (1 <= j <= env.num_changes):
        raise ValidationError(f"change index {j} outside [1, S={env.num_changes}]")
    tau_prev, tau, tau_next = b[j - 1], b[j], b[j + 1]
    if not (tau < t < tau_next):
        raise ValidationError(f"need tau_j < t < tau_(j+1), got t={t} for segment ({tau}, {tau_next})")
    gap = _gap(env.means_array[j], env.means_array[j - 1])
    n1 = tau - tau_prev
    return (n1 * (t - tau) / (t - tau_prev)) * gap * gap / (env.sigma**2)


def _gap(a, b) -> float:
    d = np.asarray(a) - np.asarray(b)
    return float(np.sqrt((d * d).sum())) if d.ndim else float(abs(d))


def effective_pre_mean(env: Environment, r: int, j: int):
    """Length-weighted average of the true means over [r, tau_j)."""
    b = env.boundaries()
    if not (1 <= j <= env.num_changes):
        raise ValidationError(f"change index {j} outside [1, S={env.num_changes}]")
    tau = b[j]
    if not (1 <= r < tau):
        raise ValidationError(f"need 1 <= r < tau_j, got r={r}, tau_j={tau}")
    mu = env.mean_series()
    chunk = mu[r - 1 : tau - 1]
    return float(chunk.mean()) if chunk.ndim == 1 else chunk.mean(axis=0)


def effective_gap(env: Environment, r: int, j: int) -> float:
    """|effective pre-change mean - mu_j|."""
    return _gap(effective_pre_mean(env, r, j), env.means_array[j])


def snr_eff(env: Environment, r: int, j: int, t: int) -> float:
    """Detection SNR for change j at time t given an actual restart at r < tau_j."""
    b = env.boundaries()
    tau, tau_next = b[j], b[j + 1]
    if not (tau < t < tau_next):
        raise ValidationError(f"need tau_j < t < tau_(j+1), got t={t} for segment ({tau}, {tau_next})")
    g = effective_gap(env, r, j)
    return ((tau - r) * (t - tau) / (t - r)) * g * g / (env.sigma**2)


@dataclass(frozen=True)
class ConfoundingCheck:
    lhs: float
    rhs: float
    holds: bool


def confounding_gap_check(n0: int, n1: int, n2: int,
                          mu0: float, mu1: float, mu2: float) -> ConfoundingCheck:
    """Check that missing one change cannot degrade the next test's SNR by
    more than the missed change's own SNR (unit noise normalization):

        (SNR2_ideal - SNR2_effective)_+ <= SNR1.

    Callers with sigma != 1 should divide the means by sigma first.
    """
    if min(n0, n1, n2) < 1:
        raise ValidationError(f"segment lengths must be >= 1, got {(n0, n1, n2)}")
    snr2_star = n1 * n2 / (n1 + n2) * (mu2 - mu1) ** 2
    mix = (n0 * mu0 + n1 * mu1) / (n0 + n1)
    n01 = n0 + n1
    snr2_eff = n01 * n2 / (n01 + n2) * (mu2 - mix) ** 2
    snr1 = n0 * n1 / (n0 + n1) * (mu1 - mu0) ** 2
    lhs = max(snr2_star - snr2_eff, 0.0)
    return ConfoundingCheck(
        lhs=lhs, rhs=snr1, holds=lhs <= snr1 + 1e-9 * max(1.0, snr1)
    )


@dataclass(frozen=True)
class ChangeDiagnostics:
    """Confounding diagnostics for one change point within one run."""

    change_index: int
    tau: int
    restart: int            # last restart before tau
    pre_samples: int        # tau - restart
    post_samples: int       # evaluation time - tau
    effective_pre_mean: float
    nominal_gap: float
    effective_gap: float
    snr_nominal: float
    snr_effective: float


def confounding_diagnostics(trace: RunTrace, env: Environment | None = None) -> list[ChangeDiagnostics]:
    """Evaluate each change at the last step of its segment."""
    env = env if env is not None else trace.environment
    if env is None:
        raise ValidationError("trace has no environment attached; pass one explicitly")
    b = env.boundaries()
    restarts = trace.restart_sequence
    out = []
    from .types import nominal_gaps

    gaps = nominal_gaps(env)
    for j in range(1, env.num_changes + 1):
        tau = b[j]
        t_eval = b[j + 1] - 1
        if t_eval <= tau:
            continue  # segment of length < 2: no post-change step to evaluate
        r = max(rm for rm in restarts if rm < tau)
        mix = effective_pre_mean(env, r, j)
        out.append(
            ChangeDiagnostics(
                change_index=j,
                tau=tau,
                restart=r,
                pre_samples=tau - r,
                post_samples=t_eval - tau,
                effective_pre_mean=mix if np.ndim(mix) == 0 else float(np.linalg.norm(mix)),
                nominal_gap=float(gaps[j - 1]),
                effective_gap=effective_gap(env, r, j),
                snr_nominal=snr_star(env, j, t_eval),
                snr_effective=snr_eff(env, r, j, t_eval),
            )
        )
    return out

"""Real-data path: CPU-utilization CSV ingestion and detector evaluation.

The benchmark series is the AWS CloudWatch CPU-utilization trace
``ec2_cpu_utilization_ac20cd.csv`` (timestamp, value columns).  The repo
ships only the reference change-point indices, not the data file; supply
the CSV via a path (or the MEANTRACK_NAB_CSV environment variable in
tests).  The regret reference is a piecewise-constant mean built from the
fixed indices, each segment mean being the empirical average of the series
over that segment.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .harness import Policy, RegretReport, regret
from .types import Environment, RunTrace, ValidationError

DEFAULT_CHANGE_INDICES = (377, 420, 592, 3575)
DEFAULT_SIGMA = 1.0


@dataclass(frozen=True)
class NabSeries:
    """Timestamps are passed through untouched; values come from column 2."""

    timestamps: tuple[str, ...]
    values: np.ndarray

    def __len__(self) -> int:
        return self.values.shape[0]


def parse_nab_csv(data) -> NabSeries:
    """Parse CSV bytes/text with a header row; values from the second column."""
    if isinstance(data, bytes):
        text = data.decode("utf-8")
    else:
        text = data
    reader = csv.reader(io.StringIO(text))
    timestamps = []
    values = []
    for row_no, row in enumerate(reader, start=1):
        if row_no == 1:
            if len(row) < 2:
                raise ValidationError(f"row 1: expected a header with >= 2 columns, got {row}")
            continue
        if not row:
            continue
        if len(row) < 2:
            raise ValidationError(f"row {row_no}: expected >= 2 columns, got {len(row)}")
        try:
            v = float(row[1])
        except ValueError:
            raise ValidationError(f"row {row_no}: non-numeric value {row[1]!r}") from None
        if not np.isfinite(v):
            raise ValidationError(f"row {row_no}: non-finite value {row[1]!r}")
        timestamps.append(row[0])
        values.append(v)
    if not values:
        raise ValidationError("no data rows after the header")
    return NabSeries(timestamps=tuple(timestamps), values=np.asarray(values, dtype=np.float64))


def load_nab_csv(path) -> NabSeries:
    with open(path, "rb") as fh:
        return parse_nab_csv(fh.read())


def reference_means(series: NabSeries, change_indices: Sequence[int],
                    sigma: float = DEFAULT_SIGMA) -> Environment:
    """Piecewise-constant reference: per-segment empirical averages of the series."""
    T = len(series)
    cps = tuple(int(c) for c in change_indices)
    for a, b in zip(cps, cps[1:]):
        if a >= b:
            raise ValidationError(f"change indices must be strictly increasing, got {a} then {b}")
    for c in cps:
        if not (2 <= c <= T):
            raise ValidationError(f"change index {c} outside (1, T={T}]")
    bounds = (1,) + cps + (T + 1,)
    means = tuple(
        float(series.values[bounds[j] - 1 : bounds[j + 1] - 1].mean())
        for j in range(len(bounds) - 1)
    )
    return Environment(change_points=cps, segment_means=means, horizon=T, sigma=sigma)


@dataclass(frozen=True)
class NabResult:
    trace: RunTrace
    report: RegretReport


def evaluate_on_nab(series: NabSeries, change_indices: Sequence[int],
                    policies: Sequence[Policy], sigma: float = DEFAULT_SIGMA,
                    ) -> Mapping[str, NabResult]:
    """Run each policy on the raw series against the piecewise reference mean.

    Deterministic: the series is the data, no noise is injected.
    """
    if not policies:
        raise ValidationError("need at least one policy")
    env = reference_means(series, change_indices, sigma=sigma)
    out = {}
    for policy in policies:
        trace = policy.run(series.values, env)
        out[policy.name] = NabResult(trace=trace, report=regret(trace, env, per_step=True))
    return out

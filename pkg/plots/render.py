#!/usr/bin/env python3
"""Regenerate experiment figures from CSV bundles emitted by `meantrack figure`.

Pure downstream consumer: reads the documented CSV schemas, recomputes
nothing, and writes one image per figure.  Usage:

    python plots/render.py --figure fig3c --in DIR --out fig3c.png

Supported figures: fig3c (regret vs horizon, log-x, full vs multiscale),
fig6 (regret and false-alarm rate vs horizon per detector), fig9 (regret
vs number of changes).
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


class RenderError(RuntimeError):
    pass


@dataclass(frozen=True)
class FigureSpec:
    figure: str
    input_dir: Path
    output_path: Path
    log_x: bool = False
    dpi: int = 120

    @property
    def csv_path(self) -> Path:
        return self.input_dir / f"{self.figure}.csv"


def read_rows(path: Path, required: list[str]) -> list[dict]:
    if not path.exists():
        raise RenderError(f"input CSV not found: {path}")
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in required if c not in header]
        if missing:
            raise RenderError(
                f"{path.name} is missing required column(s) {', '.join(missing)}; "
                f"found {header}"
            )
        rows = list(reader)
    if not rows:
        raise RenderError(f"{path.name} has a header but no data rows")
    return rows


def series_by(rows: list[dict], key: str) -> dict[str, list[dict]]:
    out: dict[str, list[dict]] = {}
    for row in rows:
        out.setdefault(row[key], []).append(row)
    return out


def _errorbar(ax, rows, x_col, y_col, err_col, label):
    xs = [float(r[x_col]) for r in rows]
    ys = [float(r[y_col]) for r in rows]
    es = [float(r[err_col]) for r in rows]
    ax.errorbar(xs, ys, yerr=es, marker="o", capsize=3, label=label)


def render_fig3c(spec: FigureSpec) -> None:
    rows = read_rows(spec.csv_path, ["T", "scan", "mean_regret", "ci_halfwidth"])
    fig, ax = plt.subplots(figsize=(6, 4))
    for scan, group in sorted(series_by(rows, "scan").items()):
        group = sorted(group, key=lambda r: float(r["T"]))
        _errorbar(ax, group, "T", "mean_regret", "ci_halfwidth", scan)
    ax.set_xscale("log")
    ax.set_xlabel("horizon T (log scale)")
    ax.set_ylabel("mean cumulative regret")
    ax.set_title("Regret scaling with the horizon")
    ax.legend()
    ax.grid(True, alpha=0.3)
    _save(fig, spec)


def render_fig6(spec: FigureSpec) -> None:
    rows = read_rows(
        spec.csv_path, ["T", "policy", "mean_regret", "stderr_regret", "fa_rate", "stderr_fa"]
    )
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(11, 4))
    for policy, group in sorted(series_by(rows, "policy").items()):
        group = sorted(group, key=lambda r: float(r["T"]))
        _errorbar(ax1, group, "T", "mean_regret", "stderr_regret", policy)
        _errorbar(ax2, group, "T", "fa_rate", "stderr_fa", policy)
    ax1.set_xlabel("horizon T")
    ax1.set_ylabel("mean cumulative regret")
    ax1.set_title("Regret: anytime vs constant thresholds")
    ax2.set_xlabel("horizon T")
    ax2.set_ylabel("false alarms per run")
    ax2.set_title("False-alarm growth")
    for ax in (ax1, ax2):
        ax.grid(True, alpha=0.3)
        ax.legend()
    _save(fig, spec)


def render_fig9(spec: FigureSpec) -> None:
    rows = read_rows(spec.csv_path, ["S", "mean_regret", "ci_halfwidth"])
    fig, ax = plt.subplots(figsize=(6, 4))
    rows = sorted(rows, key=lambda r: float(r["S"]))
    _errorbar(ax, rows, "S", "mean_regret", "ci_halfwidth", "anytime tracker")
    ax.set_xlabel("number of changes S")
    ax.set_ylabel("mean cumulative regret")
    ax.set_title("Regret scaling with the number of changes")
    ax.legend()
    ax.grid(True, alpha=0.3)
    _save(fig, spec)


def _save(fig, spec: FigureSpec) -> None:
    spec.output_path.parent.mkdir(parents=True, exist_ok=True)
    # pin metadata so re-rendering yields identical bytes
    fig.savefig(spec.output_path, dpi=spec.dpi, metadata={"Software": "plots/render.py"})
    plt.close(fig)


RENDERERS = {
    "fig3c": render_fig3c,
    "fig6": render_fig6,
    "fig9": render_fig9,
}


def render(spec: FigureSpec) -> Path:
    if spec.figure not in RENDERERS:
        raise RenderError(
            f"unknown figure {spec.figure!r}; supported: {', '.join(sorted(RENDERERS))}"
        )
    RENDERERS[spec.figure](spec)
    return spec.output_path


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--figure", required=True, choices=sorted(RENDERERS))
    ap.add_argument("--in", dest="input_dir", required=True,
                    help="directory holding <figure>.csv")
    ap.add_argument("--out", required=True, help="output image path")
    args = ap.parse_args(argv)
    spec = FigureSpec(
        figure=args.figure,
        input_dir=Path(args.input_dir),
        output_path=Path(args.out),
    )
    try:
        path = render(spec)
    except RenderError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    print(f"wrote {path}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())

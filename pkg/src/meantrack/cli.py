"""Command-line interface: detection, generation, Monte Carlo sweeps, NAB
evaluation, and figure-data export.

Exit codes: 0 success, 1 runtime failure, 2 usage or validation error.
Figure subcommands emit CSV data only; rendering lives in the separate
plots component.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import environments as envs
from . import harness, nab
from .detector import AnytimeCusum, DetectorConfig
from .types import ValidationError
from .vector import VectorAnytimeCusum

FIG3C_HORIZONS = (600, 1200, 2400, 4800, 7000, 9000)
FIG6_HORIZONS = (5000, 10000, 15000, 20000, 30000)
FIG6_CONSTANTS = (4.81, 6.0, 8.0)
FIG8_HORIZONS = (600, 1200, 2400, 4800, 7000, 9000)
FIG9_CHANGE_COUNTS = tuple(range(2, 21, 2))
DENSE_HORIZONS = (1200, 2400, 4800, 7000, 9000, 12000, 15000, 18000, 20000, 22000, 25000)
NAB_SIGMAS = (0.5, 1.0, 4.0)


def _add_common(p: argparse.ArgumentParser, out_required: bool = True):
    p.add_argument("--sigma", type=float, default=1.0, help="sub-Gaussian noise proxy")
    p.add_argument("--alpha", type=float, default=0.05, help="false-alarm budget")
    p.add_argument("--seed", type=int, default=0, help="base seed; replication i uses seed+i")
    p.add_argument("--scan", choices=["full", "multiscale"], default="full")
    p.add_argument("--base", type=float, default=2.0, help="multiscale grid base")
    p.add_argument("--threads", type=int, default=None, help="worker cap for replications")
    p.add_argument("--config", type=str, default=None,
                   help="JSON file whose keys override flag defaults")
    if out_required:
        p.add_argument("--out", type=str, required=True)


def _apply_config(parser: argparse.ArgumentParser, subparsers: list[argparse.ArgumentParser],
                  argv: list[str]) -> argparse.Namespace:
    probe = argparse.ArgumentParser(add_help=False)
    probe.add_argument("--config", type=str, default=None)
    known, _ = probe.parse_known_args(argv)
    if known.config:
        with open(known.config) as fh:
            overrides = json.load(fh)
        if not isinstance(overrides, dict):
            raise ValidationError("--config must contain a JSON object")
        overrides = {k.replace("-", "_"): v for k, v in overrides.items()}
        for sp in subparsers:
            dests = {a.dest for a in sp._actions}
            sp.set_defaults(**{k: v for k, v in overrides.items() if k in dests})
    return parser.parse_args(argv)


def _int_list(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v.strip()]


def _write_csv(path, header, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


def _fmt(v) -> str:
    return "" if v is None else repr(float(v))


# ---------------------------------------------------------------------------
# detect


def _iter_stream_lines(args):
    if args.file:
        with open(args.file) as fh:
            yield from fh
    else:
        yield from sys.stdin


def cmd_detect(args) -> int:
    cfg = DetectorConfig(sigma=args.sigma, alpha=args.alpha, scan=args.scan, base=args.base)
    out = open(args.out, "w") if args.out else sys.stdout
    det = None
    try:
        for line_no, line in enumerate(_iter_stream_lines(args), start=1):
            line = line.strip()
            if not line:
                continue
            try:
                x = [float(v) for v in line.split(",")]
            except ValueError:
                print(f"line {line_no}: cannot parse {line!r}", file=sys.stderr)
                return 2
            if det is None:
                det = (
                    AnytimeCusum(cfg)
                    if len(x) == 1
                    else VectorAnytimeCusum(cfg, dimension=len(x))
                )
            step = det.step()
            pred = step.prediction
            pred_s = repr(float(pred)) if np.ndim(pred) == 0 else ";".join(repr(float(v)) for v in pred)
            alarm = "1" if step.alarm else "0"
            print(
                f"{step.time},{pred_s},{_fmt(step.statistic)},{_fmt(step.threshold)},{alarm}",
                file=out,
            )
            det.observe(x[0] if isinstance(det, AnytimeCusum) else x)
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


# ---------------------------------------------------------------------------
# generate


def _scenario_from_args(args) -> envs.Scenario:
    name = args.scenario
    if name == "main-s5":
        return envs.scenario_main_s5(args.sigma)
    if name == "dense":
        return envs.scenario_dense(args.delta, args.sigma)
    if name == "adversarial":
        return envs.scenario_adversarial(args.s, args.c, args.sigma)
    if name == "single-change":
        return envs.scenario_single_change(args.tau1, args.jump, args.sigma)
    if name == "linear-in-s":
        return envs.scenario_linear_in_s(args.s, args.sigma)
    if name == "no-change":
        return envs.scenario_no_change(args.mean, args.sigma)
    raise ValidationError(f"unknown scenario {name!r}")


def _add_scenario_flags(p):
    p.add_argument("--scenario", required=True,
                   choices=["main-s5", "dense", "adversarial", "single-change",
                            "linear-in-s", "no-change"])
    p.add_argument("--horizon", type=int, default=1200)
    p.add_argument("--s", type=int, default=5, help="number of changes (where applicable)")
    p.add_argument("--c", type=float, default=160.0, help="amplitude calibration constant")
    p.add_argument("--delta", type=float, default=1.0, help="dense-regime growth exponent")
    p.add_argument("--tau1", type=int, default=50)
    p.add_argument("--jump", type=float, default=0.75)
    p.add_argument("--mean", type=float, default=0.0)


def cmd_generate(args) -> int:
    scenario = _scenario_from_args(args)
    rng = envs.RngSpec(args.seed).generator()
    env, series = scenario.build(args.horizon, rng)
    prefix = Path(args.out)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    Path(f"{prefix}.env.json").write_text(env.to_json() + "\n")
    v = series.values
    if v.ndim == 1:
        rows = [(t + 1, repr(float(v[t]))) for t in range(len(v))]
        header = ["t", "value"]
    else:
        rows = [(t + 1, *[repr(float(x)) for x in v[t]]) for t in range(v.shape[0])]
        header = ["t"] + [f"value_{i}" for i in range(v.shape[1])]
    _write_csv(f"{prefix}.csv", header, rows)
    print(f"wrote {prefix}.env.json and {prefix}.csv", file=sys.stderr)
    return 0


# ---------------------------------------------------------------------------
# mc


def _policy_from_args(args) -> harness.Policy:
    name = args.policy
    if name == "cusum":
        return harness.cusum_policy(args.sigma, args.alpha, scan="full")
    if name == "cusum-multiscale":
        return harness.cusum_policy(args.sigma, args.alpha, scan="multiscale", base=args.base)
    if name == "sw":
        return harness.sliding_window_policy(args.window)
    if name == "dm":
        return harness.discounted_mean_policy(args.rho)
    if name == "const":
        return harness.constant_threshold_policy(args.gamma * args.sigma, args.sigma)
    if name == "oracle":
        return harness.oracle_policy()
    raise ValidationError(f"unknown policy {name!r}")


def _add_policy_flags(p):
    p.add_argument("--policy", default="cusum",
                   choices=["cusum", "cusum-multiscale", "sw", "dm", "const", "oracle"])
    p.add_argument("--window", type=int, default=30)
    p.add_argument("--rho", type=float, default=0.98)
    p.add_argument("--gamma", type=float, default=4.81,
                   help="constant threshold in sigma units")


def cmd_mc(args) -> int:
    scenario = _scenario_from_args(args)
    policy = _policy_from_args(args)
    horizons = _int_list(args.horizons)
    summary = harness.monte_carlo(
        scenario, policy, horizons, args.reps, args.seed, threads=args.threads
    )
    _write_csv(
        args.out,
        ["T", "mean_regret", "stderr", "ci_halfwidth", "n_reps"],
        [
            (r["T"], repr(r["mean_regret"]), repr(r["stderr"]),
             repr(r["ci_halfwidth"]), r["n_reps"])
            for r in summary.rows()
        ],
    )
    print(f"wrote {args.out}", file=sys.stderr)
    return 0


# ---------------------------------------------------------------------------
# nab


def cmd_nab(args) -> int:
    series = nab.load_nab_csv(args.file)
    changes = _int_list(args.changes)
    policies = [
        harness.cusum_policy(args.sigma, args.alpha, scan=args.scan, base=args.base),
        harness.sliding_window_policy(args.window),
        harness.discounted_mean_policy(args.rho),
    ]
    results = nab.evaluate_on_nab(series, changes, policies, sigma=args.sigma)
    rows = []
    for name, res in results.items():
        cum = res.report.per_step
        tr = res.trace
        for i in range(tr.horizon):
            pred = tr.predictions[i]
            rows.append(
                (i + 1, name, repr(float(pred)), repr(float(cum[i])),
                 "1" if tr.alarm_flags[i] else "0")
            )
    _write_csv(args.out, ["t", "policy", "prediction", "cum_regret", "alarm"], rows)
    for name, res in results.items():
        print(f"{name}: regret={res.report.cumulative_regret:.2f} "
              f"alarms={res.report.num_alarms}", file=sys.stderr)
    return 0


# ---------------------------------------------------------------------------
# figure


def _summary_rows(scenario, policy, horizons, reps, seed, threads, extra=()):
    out = []
    for T in horizons:
        m = harness.replicate(scenario, policy, T, reps, seed, threads)
        mr, sr = harness.mean_and_stderr(m.regret)
        out.append((T, *extra, repr(mr), repr(sr), repr(1.96 * sr), reps))
    return out


def cmd_figure(args) -> int:
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    name = args.name
    reps = args.reps
    if name == "fig3c":
        rows = []
        for scan in ("full", "multiscale"):
            policy = harness.cusum_policy(args.sigma, args.alpha, scan=scan, base=args.base)
            label = "full" if scan == "full" else "multiscale"
            rows += [
                (T, label, *rest)
                for (T, *rest) in _summary_rows(
                    envs.scenario_main_s5(args.sigma), policy,
                    FIG3C_HORIZONS, reps or 5000, args.seed, args.threads,
                )
            ]
        _write_csv(outdir / "fig3c.csv",
                   ["T", "scan", "mean_regret", "stderr", "ci_halfwidth", "n_reps"], rows)
    elif name == "fig6":
        scenario = envs.scenario_single_change(sigma=args.sigma)
        policies = [harness.cusum_policy(args.sigma, args.alpha)]
        policies += [
            harness.constant_threshold_policy(c * args.sigma, args.sigma)
            for c in FIG6_CONSTANTS
        ]
        rows = []
        for policy in policies:
            for T in FIG6_HORIZONS:
                m = harness.replicate(scenario, policy, T, reps or 1000, args.seed, args.threads)
                mr, sr = harness.mean_and_stderr(m.regret)
                mf, sf = harness.mean_and_stderr(m.false_alarms)
                rows.append((T, policy.name, repr(mr), repr(sr), repr(mf), repr(sf), reps or 1000))
        _write_csv(outdir / "fig6.csv",
                   ["T", "policy", "mean_regret", "stderr_regret",
                    "fa_rate", "stderr_fa", "n_reps"], rows)
    elif name == "fig7":
        if not args.file:
            raise ValidationError("fig7 needs --file pointing at the CPU-utilization CSV")
        series = nab.load_nab_csv(args.file)
        changes = _int_list(args.changes)
        rows = []
        for sigma in NAB_SIGMAS:
            policy = harness.cusum_policy(sigma, args.alpha)
            res = nab.evaluate_on_nab(series, changes, [policy], sigma=args.sigma)[policy.name]
            cum = res.report.per_step
            tr = res.trace
            rows += [
                (i + 1, repr(sigma), repr(float(tr.predictions[i])), repr(float(cum[i])),
                 "1" if tr.alarm_flags[i] else "0")
                for i in range(tr.horizon)
            ]
        _write_csv(outdir / "fig7.csv",
                   ["t", "sigma", "prediction", "cum_regret", "alarm"], rows)
    elif name == "fig8":
        rows = []
        for c in (160.0, 1000.0):
            scenario = envs.scenario_adversarial(S=5, c=c, sigma=args.sigma)
            policy = harness.cusum_policy(args.sigma, args.alpha)
            rows += [
                (T, f"{c:g}", *rest)
                for (T, *rest) in _summary_rows(
                    scenario, policy, FIG8_HORIZONS, reps or 1000, args.seed, args.threads
                )
            ]
        _write_csv(outdir / "fig8.csv",
                   ["T", "c", "mean_regret", "stderr", "ci_halfwidth", "n_reps"], rows)
    elif name == "fig9":
        policy = harness.cusum_policy(args.sigma, args.alpha)
        rows = []
        for S in FIG9_CHANGE_COUNTS:
            m = harness.replicate(
                envs.scenario_linear_in_s(S, args.sigma), policy, 1000,
                reps or 1000, args.seed, args.threads,
            )
            mr, sr = harness.mean_and_stderr(m.regret)
            rows.append((S, repr(mr), repr(sr), repr(1.96 * sr), reps or 1000))
        _write_csv(outdir / "fig9.csv",
                   ["S", "mean_regret", "stderr", "ci_halfwidth", "n_reps"], rows)
    elif name == "dense":
        policy = harness.cusum_policy(args.sigma, args.alpha)
        rows = []
        for delta in (1.0, 0.95):
            scenario = envs.scenario_dense(delta, args.sigma)
            for T in DENSE_HORIZONS:
                env, _ = scenario.build(T, np.random.default_rng(0))
                m = harness.replicate(scenario, policy, T, reps or 1000, args.seed, args.threads)
                mr, sr = harness.mean_and_stderr(m.regret)
                rows.append((T, repr(delta), env.num_changes, repr(mr), repr(sr),
                             repr(1.96 * sr), reps or 1000))
        _write_csv(outdir / "dense.csv",
                   ["T", "delta", "S", "mean_regret", "stderr", "ci_halfwidth", "n_reps"], rows)
    else:
        raise ValidationError(f"unknown figure {name!r}")
    print(f"wrote bundle under {outdir}", file=sys.stderr)
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> tuple[argparse.ArgumentParser, list[argparse.ArgumentParser]]:
    ap = argparse.ArgumentParser(prog="meantrack",
                                 description="Streaming mean tracking under change points")
    sub = ap.add_subparsers(dest="command", required=True)
    children = []

    p = sub.add_parser("detect", help="stream detection: one observation per stdin line")
    _add_common(p, out_required=False)
    p.add_argument("--file", type=str, default=None, help="read observations from a file")
    p.add_argument("--out", type=str, default=None, help="write per-step CSV here (default stdout)")
    p.set_defaults(fn=cmd_detect)
    children.append(p)

    p = sub.add_parser("generate", help="emit a synthetic (environment, series) pair")
    _add_common(p)
    _add_scenario_flags(p)
    p.set_defaults(fn=cmd_generate)
    children.append(p)

    p = sub.add_parser("mc", help="Monte Carlo regret sweep over horizons")
    _add_common(p)
    _add_scenario_flags(p)
    _add_policy_flags(p)
    p.add_argument("--horizons", type=str, default="600,1200,2400")
    p.add_argument("--reps", type=int, default=100)
    p.set_defaults(fn=cmd_mc)
    children.append(p)

    p = sub.add_parser("nab", help="evaluate detectors on the CPU-utilization series")
    _add_common(p)
    p.add_argument("--file", type=str, required=True)
    p.add_argument("--changes", type=str,
                   default=",".join(str(c) for c in nab.DEFAULT_CHANGE_INDICES))
    p.add_argument("--window", type=int, default=30)
    p.add_argument("--rho", type=float, default=0.98)
    p.set_defaults(fn=cmd_nab)
    children.append(p)

    p = sub.add_parser("figure", help="emit the CSV data behind a named figure")
    _add_common(p)
    p.add_argument("--name", required=True,
                   choices=["fig3c", "fig6", "fig7", "fig8", "fig9", "dense"])
    p.add_argument("--reps", type=int, default=None,
                   help="override the per-figure default replication count")
    p.add_argument("--file", type=str, default=None, help="data CSV (fig7 only)")
    p.add_argument("--changes", type=str,
                   default=",".join(str(c) for c in nab.DEFAULT_CHANGE_INDICES))
    p.set_defaults(fn=cmd_figure)
    children.append(p)

    return ap, children


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser, children = build_parser()
    try:
        args = _apply_config(parser, children, argv)
    except (ValidationError, json.JSONDecodeError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    try:
        return args.fn(args)
    except (ValidationError, FileNotFoundError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except Exception as e:  # noqa: BLE001 - boundary: report and signal failure
        print(f"runtime failure: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

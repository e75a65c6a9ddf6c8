"""``dqe`` command-line tool.

Exit codes: 0 success, 2 usage or configuration error, 3 data error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import sys
from dataclasses import replace
from pathlib import Path
from typing import Any, Sequence

from . import __version__
from .metric import aggregate, evaluate_series
from .partition import NoPeriodError, estimate_period
from .series_io import DataError, EvaluationReport, LabeledSeries, _format_float, read_series, write_report
from .synthetic import (
    AXES,
    METRICS,
    ContiguousFA,
    FullAllEvents,
    FullOneEvent,
    InfeasibleError,
    MinimalAllEvents,
    MinimalOneEvent,
    NearMiss,
    RandomDetections,
    RobustnessConfig,
    ScatteredFA,
    ScenarioSpec,
    make_scenario,
    robustness_sweep,
    score_gap_experiment,
)
from .thresholds import EvalConfig, thread_count

EXIT_OK, EXIT_CONFIG, EXIT_DATA = 0, 2, 3


class ConfigError(Exception):
    pass


class CliDataError(Exception):
    pass


def provenance(config: dict[str, Any]) -> dict[str, str]:
    blob = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return {"tool": f"dqe {__version__}", "config_hash": hashlib.sha256(blob.encode()).hexdigest()[:16]}


def _provenance_line(config: dict[str, Any]) -> str:
    p = provenance(config)
    return f"# {p['tool']} config_hash={p['config_hash']}"


def _cell(v: Any) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return _format_float(v)
    return str(v)


def _write_csv(rows: list[list[Any]], header: list[str], config: dict[str, Any], output: str | None) -> None:
    buf = io.StringIO()
    buf.write(_provenance_line(config) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    _emit(buf.getvalue(), output)


def _emit(text: str, output: str | None) -> None:
    if output is None:
        sys.stdout.write(text)
        return
    try:
        Path(output).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"--output: cannot write {output}: {exc.strerror}") from None


# ---------------------------------------------------------------- shared helpers


def _load(path: str, fmt: str | None) -> LabeledSeries:
    p = Path(path)
    if not p.is_file():
        raise CliDataError(f"--input: cannot read {path}")
    try:
        return read_series(p, fmt)
    except DataError as exc:
        raise CliDataError(f"{path}: {exc}") from None


def _add_width_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_mutually_exclusive_group()
    g.add_argument("--l-nm", type=int, help="near-miss band width in timesteps")
    g.add_argument("--period", type=int, help="series period; the band width is period // 2")
    g.add_argument("--auto-period", action="store_true", help="estimate the period from the score sequence")
    p.add_argument("--max-lag", type=int, help="largest lag searched by --auto-period (default T//2)")


def _add_eval_flags(p: argparse.ArgumentParser) -> None:
    _add_width_flags(p)
    p.add_argument("--format", choices=["csv", "ndjson"], help="input format (default: from file extension)")
    p.add_argument("--thresholds", type=int, default=100, help="number of thresholds M (default 100)")
    p.add_argument("--grid", choices=["uniform", "distinct"], default="uniform", help="threshold grid")
    p.add_argument("--mode", choices=["score", "binary"], help="default: score if the file has scores")
    p.add_argument("--pa-k", type=float, default=20.0, help="K for PA-K in percent (default 20)")


def _resolve_mode(args: argparse.Namespace, series: LabeledSeries) -> str:
    mode = args.mode or ("score" if series.scores is not None else "binary")
    if mode == "score" and series.scores is None:
        raise ConfigError(f"--mode score: {series.name} has no score column")
    return mode


def _resolve_l_nm(args: argparse.Namespace, series: LabeledSeries, mode: str) -> int:
    if mode == "binary" and args.l_nm is None:
        raise ConfigError("binary mode requires --l-nm")
    if args.l_nm is not None:
        if args.l_nm < 1:
            raise ConfigError("--l-nm must be >= 1")
        return args.l_nm
    if args.period is not None:
        if args.period < 2:
            raise ConfigError("--period must be >= 2")
        return args.period // 2
    if args.auto_period:
        try:
            est = estimate_period(series.scores, args.max_lag)
        except NoPeriodError as exc:
            raise CliDataError(f"{series.name}: {exc}; pass --l-nm explicitly") from None
        except ValueError as exc:
            raise ConfigError(f"--auto-period: {exc}") from None
        return max(1, est.tau // 2)
    raise ConfigError("one of --l-nm, --period or --auto-period is required")


def _eval_config(args: argparse.Namespace, series: LabeledSeries) -> EvalConfig:
    mode = _resolve_mode(args, series)
    l_nm = _resolve_l_nm(args, series, mode)
    if args.thresholds < 1:
        raise ConfigError("--thresholds must be >= 1")
    try:
        return EvalConfig(
            l_nm=l_nm,
            m_thresholds=args.thresholds,
            grid_mode="distinct_scores" if args.grid == "distinct" else "uniform",
            mode=mode,
            pa_k=args.pa_k,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _config_record(cfg: EvalConfig) -> dict[str, Any]:
    return {
        "l_nm": cfg.l_nm,
        "thresholds": cfg.m_thresholds,
        "grid": cfg.grid_mode,
        "mode": cfg.mode,
        "pa_k": cfg.pa_k,
    }


def _evaluate(series: LabeledSeries, cfg: EvalConfig) -> EvaluationReport:
    try:
        return evaluate_series(series, cfg)
    except DataError as exc:
        raise CliDataError(f"{series.name}: {exc}") from None
    except ValueError as exc:
        raise CliDataError(f"{series.name}: {exc}") from None


# ---------------------------------------------------------------- commands


def run_eval(args: argparse.Namespace) -> int:
    series = _load(args.input, args.format)
    cfg = _eval_config(args, series)
    report = _evaluate(series, cfg)
    record = _config_record(cfg)
    report = replace(report, provenance=provenance(record))
    if args.output:
        try:
            write_report(report, args.output)
        except OSError as exc:
            raise ConfigError(f"--output: {exc}") from None
    print(f"series {report.series}  T={report.T}  l_nm={cfg.l_nm}  mode={cfg.mode}  thresholds={cfg.m_thresholds}")
    c = report.components
    print(f"DQE {report.dqe:.4f}  cap {c['cap']:.4f}  nm {c['nm']:.4f}  fa {c['fa']:.4f}")
    for e in report.events:
        print(
            f"  event {e.index} [{e.span[0]},{e.span[1]})  dqe_local {e.dqe_local:.4f}"
            f"  cap {e.cap:.4f}  nm {e.nm:.4f}  fa {e.fa:.4f}"
        )
    return EXIT_OK


def _parse_list(raw: str, valid: Sequence[str], flag: str) -> list[str]:
    items = [x.strip() for x in raw.split(",") if x.strip()]
    bad = [x for x in items if x not in valid]
    if bad or not items:
        raise ConfigError(f"{flag}: unknown value(s) {bad or raw!r}; valid: {', '.join(valid)}")
    return items


def _ranks(values: list[float | None]) -> list[int | None]:
    present = sorted((v for v in values if v is not None), reverse=True)
    return [None if v is None else 1 + present.index(v) for v in values]


def run_compare(args: argparse.Namespace) -> int:
    metrics = _parse_list(args.metrics, METRICS, "--metrics")
    if args.aggregate and "dqe" not in metrics:
        raise ConfigError("--aggregate needs dqe among --metrics")
    reports = []
    records = []
    for path in args.input:
        series = _load(path, args.format)
        cfg = _eval_config(args, series)
        reports.append(_evaluate(series, cfg))
        records.append({"input": Path(path).name, **_config_record(cfg)})

    table = [[r.dqe if m == "dqe" else r.baselines.get(m) for m in metrics] for r in reports]
    rank_cols = [_ranks([row[j] for row in table]) for j in range(len(metrics))]
    rows = [
        [r.series, *table[i], *(rank_cols[j][i] for j in range(len(metrics)))] for i, r in enumerate(reports)
    ]
    header = ["series", *metrics, *(f"rank_{m}" for m in metrics)]
    config = {"inputs": records, "metrics": metrics, "aggregate": args.aggregate}
    if args.aggregate:
        # pooled DQE goes under the dqe column of a trailing row
        values: list[Any] = [None] * len(metrics)
        values[metrics.index("dqe")] = aggregate(reports, args.aggregate)
        rows.append([f"aggregate[{args.aggregate}]", *values, *([None] * len(metrics))])
    _write_csv(rows, header, config, args.output)
    return EXIT_OK


_PATTERNS = ("minimal-all", "minimal-one", "full-one", "full-all", "near-miss", "scattered-fa", "contiguous-fa", "random")


def _pattern(args: argparse.Namespace):
    s = args.scenario
    if s == "minimal-all":
        return MinimalAllEvents()
    if s == "minimal-one":
        return MinimalOneEvent()
    if s == "full-one":
        return FullOneEvent()
    if s == "full-all":
        return FullAllEvents()
    if s == "near-miss":
        return NearMiss(args.offset, args.duration, args.side)
    if s == "scattered-fa":
        return ScatteredFA(args.count, args.total_duration, not args.no_capture)
    if s == "contiguous-fa":
        return ContiguousFA(args.total_duration, not args.no_capture)
    if s == "random":
        if args.p is None or not (0.0 < args.p < 1.0):
            raise ConfigError("p must be in (0,1)")
        return RandomDetections(args.p, args.seed)
    raise ConfigError(f"--scenario: unknown scenario {s!r}")


def run_synth(args: argparse.Namespace) -> int:
    if args.scenario == "score-gap":
        if not args.axis or not args.values:
            raise ConfigError("score-gap needs --axis and --values")
        axis = args.axis.replace("-", "_")
        try:
            values = [float(v) for v in args.values.split(",") if v.strip()]
        except ValueError:
            raise ConfigError(f"--values: not a comma-separated list of numbers: {args.values!r}") from None
        metrics = _parse_list(args.metric, METRICS, "--metric")
        if args.l_nm is not None and args.l_nm < 1:
            raise ConfigError("--l-nm must be >= 1")
        rows = []
        try:
            for m in metrics:
                for r in score_gap_experiment(axis, values, m, args.l_nm, args.pa_k):
                    value = int(r.value) if axis != "anomaly_ratio" else r.value
                    rows.append([r.axis, value, r.metric, r.score_max, r.score_gap])
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        config = {"scenario": "score-gap", "axis": axis, "values": values, "metrics": metrics, "l_nm": args.l_nm, "pa_k": args.pa_k}
        _write_csv(rows, ["axis", "value", "metric", "score_max", "score_gap"], config, args.output)
        return EXIT_OK

    pattern = _pattern(args)
    try:
        if args.ratio is not None:
            spec = ScenarioSpec.from_ratio(args.num_anomalies, args.anomaly_len, args.ratio, pattern)
        else:
            spec = ScenarioSpec(args.T, args.num_anomalies, args.anomaly_len, pattern)
        labels, det = make_scenario(spec)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    rows = [[int(a), int(b)] for a, b in zip(labels, det)]
    config = {"scenario": args.scenario, "spec": repr(spec)}
    _write_csv(rows, ["label", "detection"], config, args.output)
    return EXIT_OK


def run_robustness(args: argparse.Namespace) -> int:
    series = _load(args.input, args.format)
    if series.scores is None:
        raise ConfigError("robustness needs a score column")
    args.mode = "score"
    cfg = _eval_config(args, series)
    metrics = _parse_list(args.metrics, METRICS, "--metrics")
    try:
        rcfg = RobustnessConfig(samples_per_axis=args.samples, seed=args.seed, tau=args.tau)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    try:
        result = robustness_sweep(series, rcfg, metrics, cfg)
    except InfeasibleError as exc:
        raise ConfigError(str(exc)) from None
    except ValueError as exc:
        raise CliDataError(f"{series.name}: {exc}") from None
    rows = [[axis, m, result.std[axis][m]] for axis in result.std for m in metrics]
    rows += [["overall", m, v] for m, v in result.overall().items()]
    config = {
        **_config_record(cfg),
        "input": Path(args.input).name,
        "samples": args.samples,
        "seed": args.seed,
        "tau": args.tau,
        "metrics": metrics,
    }
    _write_csv(rows, ["axis", "metric", "std_dev"], config, args.output)
    return EXIT_OK


def run_period(args: argparse.Namespace) -> int:
    series = _load(args.input, args.format)
    if series.scores is None:
        raise CliDataError(f"{series.name}: period estimation needs a score column")
    try:
        est = estimate_period(series.scores, args.max_lag)
    except NoPeriodError as exc:
        raise CliDataError(f"{series.name}: {exc}") from None
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    print(f"tau={est.tau} l_nm={max(1, est.tau // 2)}")
    return EXIT_OK


def run_doc_check(args: argparse.Namespace) -> int:
    from .doccheck import doc_examples_check

    results = doc_examples_check(Path(args.docs))
    failed = 0
    for r in results:
        print(("PASS " if r.ok else "FAIL ") + r.name + ("" if r.ok else f": {r.message}"))
        failed += not r.ok
    if not results:
        print(f"no worked examples found under {args.docs}")
        return EXIT_DATA
    return EXIT_OK if failed == 0 else 1


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dqe", description="Detection Quality Evaluation for time-series anomaly detection")
    parser.add_argument("--version", action="version", version=f"dqe {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="{eval,compare,synth,robustness,period}", required=True)

    p = sub.add_parser("eval", help="evaluate one labelled score file")
    p.add_argument("--input", required=True)
    p.add_argument("--output", help="report JSON path")
    _add_eval_flags(p)
    p.set_defaults(func=run_eval)

    p = sub.add_parser("compare", help="score several inputs with several metrics and rank them")
    p.add_argument("--input", required=True, nargs="+", help="one or more input files")
    p.add_argument("--metrics", default=",".join(METRICS), help=f"comma list from {', '.join(METRICS)}")
    p.add_argument(
        "--aggregate", choices=["sequence_level", "event_level"], help="append a row with the pooled DQE across inputs"
    )
    p.add_argument("--output", help="CSV path (default: standard output)")
    _add_eval_flags(p)
    p.set_defaults(func=run_compare)

    p = sub.add_parser("synth", help="synthetic scenarios and score_max / score_gap tables")
    p.add_argument("--scenario", required=True, choices=["score-gap", *_PATTERNS])
    p.add_argument("--axis", choices=[a.replace("_", "-") for a in AXES])
    p.add_argument("--values", help="comma-separated axis values")
    p.add_argument("--metric", default="dqe", help="metric or comma list of metrics")
    p.add_argument("--l-nm", type=int, help="near-miss width for DQE (default: a quarter of the anomaly spacing)")
    p.add_argument("--pa-k", type=float, default=20.0)
    p.add_argument("--T", type=int, default=1000)
    p.add_argument("--num-anomalies", type=int, default=10)
    p.add_argument("--anomaly-len", type=int, default=10)
    p.add_argument("--ratio", type=float, help="derive T from this anomaly ratio instead of --T")
    p.add_argument("--offset", type=int, default=5)
    p.add_argument("--duration", type=int, default=3)
    p.add_argument("--side", choices=["before", "after"], default="before")
    p.add_argument("--count", type=int, default=5)
    p.add_argument("--total-duration", type=int, default=10)
    p.add_argument("--no-capture", action="store_true", help="false-alarm scenarios without anomaly captures")
    p.add_argument("--p", type=float, help="detection probability for --scenario random")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", help="CSV path (default: standard output)")
    p.set_defaults(func=run_synth)

    p = sub.add_parser("robustness", help="lag / noise / anomaly-ratio robustness of the metrics")
    p.add_argument("--input", required=True)
    p.add_argument("--format", choices=["csv", "ndjson"])
    _add_width_flags(p)
    p.add_argument("--thresholds", type=int, default=100)
    p.add_argument("--grid", choices=["uniform", "distinct"], default="uniform")
    p.add_argument("--pa-k", type=float, default=20.0)
    p.add_argument("--metrics", default=",".join(METRICS))
    p.add_argument("--samples", type=int, default=5, help="perturbation points per axis")
    p.add_argument("--tau", type=int, help="period used for the lag range (default 2 * l_nm)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", help="CSV path (default: standard output)")
    p.set_defaults(func=run_robustness, mode=None)

    p = sub.add_parser("period", help="estimate the series period from the score column")
    p.add_argument("--input", required=True)
    p.add_argument("--format", choices=["csv", "ndjson"])
    p.add_argument("--max-lag", type=int)
    p.set_defaults(func=run_period)

    p = sub.add_parser("doc-check")
    p.add_argument("--docs", default="docs", help="directory of markdown files with worked examples")
    p.set_defaults(func=run_doc_check)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        thread_count()
        return args.func(args)
    except ConfigError as exc:
        print(f"dqe: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CliDataError as exc:
        print(f"dqe: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        # e.g. malformed DQE_THREADS
        print(f"dqe: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())

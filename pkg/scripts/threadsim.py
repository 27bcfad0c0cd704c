#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
threadsim.py

Command-line front end:

  simulate   generate threads (agent or intensity model) or sizes (analytic sampler)
  fit        MLE of waiting times, exposure durations or conversation sizes
  analyze    growth curves, size / in-degree / waiting-time distributions, report
  validate   run the acceptance checks

Logs go to STDERR; reports and seeds go to STDOUT. Every file written
starts with a '#' line carrying the invocation and the seed.

Exit codes: 0 ok, 1 acceptance failure, 2 bad parameters, 3 bad data or
failed estimation.

Usage:
  python scripts/threadsim.py simulate --topics 500 --seed 7 --out runs/a
  python scripts/threadsim.py simulate --population shared --M 20 --a 1 --b 1e4 --out runs/site
  python scripts/threadsim.py fit --target waiting --input runs/site/events.jsonl
  python scripts/threadsim.py analyze --input runs/a/events.jsonl --out runs/a/report
  python scripts/threadsim.py validate --scale tiny --seed 1
  python scripts/threadsim.py --config run.json simulate
"""

from __future__ import annotations

import argparse
import json
import shlex
import sys
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

import acceptance
import analytics
import conversation
import distributions
import ingestion
from conversation import TopicParams
from distributions import ExponentialLaw, ParetoLaw, TruncatedPareto
from errors import DataError, EstimationError, ParameterError, emit, set_quiet

EXIT_OK = 0
EXIT_CHECKS_FAILED = 1
EXIT_PARAMETER = 2
EXIT_DATA = 3

DEFAULT_OUT = Path("threadsim-out")
DEFAULT_EXPOSURE = "exp:0.001"
QQ_QUANTILES = 100


def log(msg: str) -> None:
    emit("threadsim", msg)


def parse_exposure(text: str):
    """exp:<rate> or pareto:<t_min>:<alpha>."""
    parts = str(text).strip().lower().split(":")
    try:
        if parts[0] in ("exp", "exponential") and len(parts) == 2:
            return ExponentialLaw(float(parts[1]))
        if parts[0] == "pareto" and len(parts) == 3:
            return ParetoLaw(float(parts[1]), float(parts[2]))
    except ValueError as e:
        raise ParameterError(f"bad exposure spec {text!r}: {e}") from e
    raise ParameterError(f"bad exposure spec {text!r}; use exp:<rate> or pareto:<t_min>:<alpha>")


def resolve_seed(seed: Optional[int]) -> int:
    """The given seed, or fresh entropy; printed either way."""
    if seed is None:
        seed = int(np.random.SeedSequence().entropy)
    print(f"Seed : {seed}", flush=True)
    return int(seed)


def _header(argv: Sequence[str], seed: Optional[int] = None) -> str:
    text = "threadsim " + " ".join(shlex.quote(a) for a in argv)
    return text if seed is None else f"{text} seed={seed}"


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------

def topic_params(args) -> TopicParams:
    return TopicParams(
        gamma=args.gamma,
        c0=args.c0,
        M=args.M,
        exposure=parse_exposure(args.exposure),
        waiting=TruncatedPareto(args.a, args.b, args.c),
        delta0=args.delta0,
    )


def cmd_simulate(args, argv: Sequence[str]) -> int:
    params = topic_params(args)
    if args.topics < 1:
        raise ParameterError(f"--topics must be >= 1, got {args.topics}")
    if args.population == "shared" and args.mode != "agent":
        raise ParameterError(f"--population shared needs --mode agent, got --mode {args.mode}")
    seed = resolve_seed(args.seed)
    header = _header(argv, seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    log(f"c' = {params.c_prime:g}, gamma' = {params.gamma_prime:g}, mode = {args.mode}")

    if args.mode == "analytic":
        T, N = conversation.simulate_sizes(params, args.topics, seed)
        rows = [(conversation.topic_name(k), t, int(n)) for k, (t, n) in enumerate(zip(T, N))]
        analytics.write_table_csv(out / "sizes.csv", ("topic", "T", "N"), rows, header)
        log(f"wrote {len(rows)} sizes to {out / 'sizes.csv'}")
        return EXIT_OK

    activity = None
    if args.population == "shared":
        if args.workers > 1:
            log("a shared population runs in one process; --workers ignored")
        site = conversation.simulate_site(
            params, args.topics, seed, args.topic_interval, user_age=args.user_age, candidates=args.candidates
        )
        threads, activity = site.threads, site.activity()
    else:
        options = {"user_age": args.user_age, "candidates": args.candidates} if args.mode == "agent" else {}
        threads = conversation.simulate_threads(
            params,
            args.topics,
            seed,
            workers=args.workers,
            model=args.mode,
            topic_interval=args.topic_interval,
            **options,
        )
    events = out / f"events.{args.format}"
    ingestion.write_events(events, threads, header=header, fmt=args.format, activity=activity)
    summary = conversation.thread_summary(threads)
    analytics.write_table_csv(
        out / "summary.csv",
        ("topic", "T", "N", "max_indegree"),
        [(r["topic"], r["T"], r["N"], r["max_indegree"]) for r in summary],
        header,
    )
    log(f"wrote {events} and {out / 'summary.csv'}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# fit
# ---------------------------------------------------------------------------

def _load_for_fit(args) -> Tuple[Optional[ingestion.Corpus], Optional[np.ndarray]]:
    if args.format == "samples":
        return None, ingestion.read_samples(Path(args.input), args.column)
    return ingestion.parse_corpus(Path(args.input), args.format), None


def fit_rows(args) -> List[Tuple[str, object]]:
    corpus, samples = _load_for_fit(args)
    target = args.target
    if samples is None:
        if target == "waiting":
            samples = ingestion.waiting_times(corpus)
        elif target == "exposure":
            samples = ingestion.exposure_durations(corpus)
        else:
            samples = ingestion.topic_sizes(corpus, args.q)
    if samples.size == 0:
        hint = " (no user has two comments on record; simulate with --population shared)" if target == "waiting" else ""
        raise DataError(f"no {target} samples in {args.input}{hint}")
    if args.trim_quantile is not None:
        samples = analytics.trim_upper(samples, args.trim_quantile)

    if target == "waiting":
        a = args.a if args.a is not None else float(samples.min())
        fit = distributions.tp_mle(samples, a, args.b)
        return fit.rows()
    if target == "exposure":
        choice = distributions.fit_exposure(samples)
        rows: List[Tuple[str, object]] = [("selected_family", choice.family), ("loglik_gap", choice.loglik_gap)]
        for name, candidate in choice.candidates.items():
            rows.extend((f"{name}.{k}", v) for k, v in candidate.rows())
        return rows

    positive = samples[samples > 0]
    if positive.size < samples.size:
        log(f"{samples.size - positive.size} zero-size topics left out of the Weibull fit")
    fit = distributions.weibull_mle(positive)
    return fit.rows() + [("implied_c_prime", 1.0 / fit.params["shape"])]


def cmd_fit(args, argv: Sequence[str]) -> int:
    rows = fit_rows(args)
    if args.out:
        analytics.write_pairs_csv(Path(args.out), rows, _header(argv))
        log(f"wrote {args.out}")
    else:
        print("name,value")
        for name, value in rows:
            print(f"{name},{value}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# analyze
# ---------------------------------------------------------------------------

def _optional(report: List[Tuple[str, object]], name: str, fn: Callable[[], None]) -> None:
    """Run one analysis step; data or estimation trouble is reported, not fatal."""
    try:
        fn()
    except (DataError, EstimationError) as e:
        log(f"WARNING: {name} skipped: {e}")
        report.append((f"{name}_skipped", str(e)))


def analyze_corpus(args, argv: Sequence[str], seed: int) -> List[Tuple[str, object]]:
    corpus = ingestion.parse_corpus(Path(args.input), args.format)
    if len(corpus) == 0:
        raise DataError(f"no topics in {args.input}")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    header = _header(argv, seed)
    rng = np.random.default_rng(np.random.SeedSequence([seed]))
    threads = ingestion.corpus_threads(corpus, args.q)

    report: List[Tuple[str, object]] = [
        ("topics", len(corpus)),
        ("comments", corpus.n_comments),
        ("activity_records", len(corpus.activity)),
        ("parse_issues", len(corpus.issues)),
    ]
    regressions: List[Tuple[str, object]] = []

    curves = analytics.growth_curves(threads, args.n_grid)
    analytics.write_curve_csv(out / "n_of_t.csv", curves.n_of_t, header)
    analytics.write_curve_csv(out / "dn_dt.csv", curves.dn_dt, header)

    def growth():
        slopes = analytics.growth_slopes(threads, args.n_grid, (args.span_lo, args.span_hi))
        regressions.extend(slopes.fit_n.rows("n_of_t."))
        regressions.extend(slopes.fit_dndt.rows("dn_dt."))
        report.extend(
            [
                ("slope_N", slopes.fit_n.slope),
                ("slope_dNdt", slopes.fit_dndt.slope),
                ("slope_difference", slopes.difference),
            ]
        )

    _optional(report, "growth", growth)

    sizes = ingestion.topic_sizes(corpus, args.q)
    positive = sizes[sizes > 0]

    def size_law():
        analytics.write_curve_csv(out / "size_ccdf.csv", analytics.ccdf(sizes), header)
        density = analytics.log_binned_density(positive, args.bins_per_decade)
        analytics.write_curve_csv(out / "size_density.csv", density, header)
        regressions.extend(analytics.loglog_regression(density).rows("size_density."))
        fit = distributions.weibull_mle(positive)
        law = distributions.WeibullLaw(fit.params["shape"], fit.params["scale"])
        report.extend(
            [
                ("size_weibull_shape", fit.params["shape"]),
                ("size_weibull_scale", fit.params["scale"]),
                ("implied_c_prime", 1.0 / fit.params["shape"]),
                ("size_ks_weibull", analytics.ks_distance(positive, law.cdf)),
            ]
        )
        analytics.write_curve_csv(out / "size_weibull_plot.csv", analytics.weibull_plot(positive), header)
        simulated = distributions.weibull_sample(law, rng, positive.size)
        emp_q, sim_q = analytics.qq_points(positive, simulated, QQ_QUANTILES)
        analytics.write_table_csv(out / "size_qq.csv", ("empirical", "simulated"), zip(emp_q, sim_q), header)
        tail = analytics.tail_classify(positive)
        report.extend(
            [
                ("size_tail_verdict", tail.verdict),
                ("size_tail_shape", tail.weibull.shape),
                ("size_ccdf_above_exponential", tail.above_exponential),
            ]
        )

    _optional(report, "size", size_law)

    def indegree():
        hist = conversation.indegree_histogram(threads)
        analytics.write_curve_csv(out / "indegree_ccdf.csv", analytics.indegree_ccdf(hist), header)
        delta0 = args.delta0 if args.delta0 is not None else analytics.estimate_delta0(hist)
        fit = analytics.indegree_tail_fit(hist, delta0)
        regressions.extend(fit.rows("indegree_ccdf."))
        report.extend([("delta0", delta0), ("indegree_tail_slope", fit.slope)])

    _optional(report, "indegree", indegree)

    waits = ingestion.waiting_times(corpus)

    def waiting():
        density = analytics.log_binned_density(waits, args.bins_per_decade)
        analytics.write_curve_csv(out / "waiting_density.csv", density, header)
        regressions.extend(analytics.loglog_regression(density).rows("waiting_density."))
        fit = distributions.tp_mle(waits, float(waits.min()))
        report.extend([("waiting_c", fit.params["c"]), ("waiting_c_stderr", fit.stderr["c"])])

    if waits.size:
        _optional(report, "waiting", waiting)

    def exposure():
        choice = distributions.fit_exposure(ingestion.exposure_durations(corpus))
        report.extend([("exposure_family", choice.family), ("exposure_loglik_gap", choice.loglik_gap)])

    _optional(report, "exposure", exposure)

    ratios = []
    for topic in corpus.topics.values():
        try:
            ratios.append(ingestion.before_after_ratio(topic.minutes(), ingestion.topic_inflection(topic, args.q)))
        except DataError:
            continue
    if ratios:
        report.extend([("before_after_ratio_mean", float(np.mean(ratios))), ("before_after_topics", len(ratios))])

    analytics.write_pairs_csv(out / "regressions.csv", regressions, header)
    analytics.write_pairs_csv(out / "report.csv", report, header)
    return report


def cmd_analyze(args, argv: Sequence[str]) -> int:
    seed = resolve_seed(args.seed)
    report = analyze_corpus(args, argv, seed)
    width = max(len(name) for name, _ in report)
    lines = [f"{name:<{width}}  {value}" for name, value in report]
    out = Path(args.out)
    (out / "report.txt").write_text(f"# {_header(argv, seed)}\n" + "\n".join(lines) + "\n", encoding="utf-8")
    print("\n".join(lines))
    return EXIT_OK


# ---------------------------------------------------------------------------
# validate
# ---------------------------------------------------------------------------

def cmd_validate(args, argv: Sequence[str]) -> int:
    seed = resolve_seed(args.seed)
    report = acceptance.run_checks(args.scale, seed, args.only)
    for result in report.results:
        print(result.line())
    failed = [r.name for r in report.results if not r.passed]
    if failed:
        print(f"{len(failed)} of {len(report.results)} checks FAILED")
        return EXIT_CHECKS_FAILED
    print(f"all {len(report.results)} checks passed (scale={args.scale})")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> Tuple[argparse.ArgumentParser, Dict[str, argparse.ArgumentParser]]:
    p = argparse.ArgumentParser(prog="threadsim", description="Conversation-thread simulator and fitting toolkit")
    p.add_argument("--quiet", action="store_true", help="Silence progress logging on stderr")
    p.add_argument("--config", help="Flat JSON object of flag defaults; explicit flags win")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="Simulate threads or sizes")
    s.add_argument("--gamma", type=float, default=0.01, help="Interestingness scale")
    s.add_argument("--c0", type=float, default=0.5, help="Social-feedback exponent")
    s.add_argument("--c", type=float, default=1.2, help="Waiting-time tail exponent")
    s.add_argument("--a", type=float, default=0.01, help="Waiting-time lower bound")
    s.add_argument("--b", type=float, default=1e6, help="Waiting-time upper bound")
    s.add_argument("--M", type=int, default=2000, help="Number of users")
    s.add_argument("--delta0", type=float, default=1.0, help="Zero-degree attachment offset")
    s.add_argument("--exposure", default=DEFAULT_EXPOSURE, help="exp:<rate> or pareto:<t_min>:<alpha>")
    s.add_argument("--topics", type=int, default=100)
    s.add_argument("--seed", type=int)
    s.add_argument("--mode", choices=conversation.THREAD_MODELS + ("analytic",), default="agent")
    s.add_argument("--user-age", dest="user_age", choices=conversation.USER_AGES, default="equilibrium")
    s.add_argument("--candidates", choices=conversation.CANDIDATE_RULES, default="next")
    s.add_argument(
        "--population",
        choices=conversation.POPULATIONS,
        default="per-topic",
        help="per-topic: independent users per topic; shared: one user population on one site clock",
    )
    s.add_argument(
        "--topic-interval",
        dest="topic_interval",
        type=float,
        default=conversation.DEFAULT_TOPIC_INTERVAL,
        help="Minutes between topic creations",
    )
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--format", choices=ingestion.FORMATS, default="jsonl")
    s.add_argument("--out", default=str(DEFAULT_OUT))

    f = sub.add_parser("fit", help="Fit a waiting-time, exposure or size law")
    f.add_argument("--target", choices=("waiting", "exposure", "size"), required=True)
    f.add_argument("--input", required=True)
    f.add_argument("--format", choices=ingestion.FORMATS + ("samples",))
    f.add_argument("--column", help="Column of a samples CSV")
    f.add_argument("--trim-quantile", dest="trim_quantile", type=float)
    f.add_argument("--a", type=float, help="Waiting-time lower bound (default: smallest sample)")
    f.add_argument("--b", type=float, help="Waiting-time upper bound (default: largest sample)")
    f.add_argument("--q", type=float, default=ingestion.DEFAULT_INFLECTION_Q)
    f.add_argument("--out", help="CSV file (default: stdout)")

    a = sub.add_parser("analyze", help="Curves, fits and report for an event file")
    a.add_argument("--input", required=True)
    a.add_argument("--format", choices=ingestion.FORMATS)
    a.add_argument("--out", default=str(DEFAULT_OUT))
    a.add_argument("--q", type=float, default=ingestion.DEFAULT_INFLECTION_Q)
    a.add_argument("--span-lo", dest="span_lo", type=float, default=analytics.GROWTH_SPAN[0])
    a.add_argument("--span-hi", dest="span_hi", type=float, default=analytics.GROWTH_SPAN[1])
    a.add_argument("--n-grid", dest="n_grid", type=int, default=analytics.DEFAULT_GRID_POINTS)
    a.add_argument("--bins-per-decade", dest="bins_per_decade", type=int, default=analytics.DEFAULT_BINS_PER_DECADE)
    a.add_argument("--delta0", type=float, help="Known attachment offset (default: estimated)")
    a.add_argument("--seed", type=int)

    v = sub.add_parser("validate", help="Run the acceptance checks")
    v.add_argument("--scale", choices=tuple(acceptance.SCALES), default="default")
    v.add_argument("--seed", type=int)
    v.add_argument("--only", action="append", choices=tuple(acceptance.CHECKS), help="Run only this check (repeatable)")

    return p, {"simulate": s, "fit": f, "analyze": a, "validate": v}


def apply_config(path: str, commands: Dict[str, argparse.ArgumentParser]) -> None:
    try:
        cfg = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError as e:
        raise ParameterError(f"config file not found: {path}") from e
    except json.JSONDecodeError as e:
        raise ParameterError(f"config file {path} is not valid JSON: {e.msg}") from e
    if not isinstance(cfg, dict) or any(isinstance(v, (dict, list)) for v in cfg.values()):
        raise ParameterError(f"config file {path} must be a flat JSON object")
    known = set()
    for parser in commands.values():
        dests = {action.dest for action in parser._actions}
        parser.set_defaults(**{k: v for k, v in cfg.items() if k in dests})
        known |= dests
    unused = sorted(set(cfg) - known)
    if unused:
        log(f"WARNING: config keys not used by any command: {', '.join(unused)}")


COMMANDS = {
    "simulate": cmd_simulate,
    "fit": cmd_fit,
    "analyze": cmd_analyze,
    "validate": cmd_validate,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, commands = build_parser()
    try:
        pre, _ = parser.parse_known_args(argv)
        set_quiet(pre.quiet)
        if pre.config:
            apply_config(pre.config, commands)
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_PARAMETER
    except ParameterError as e:
        print(f"[threadsim] ERROR: {e}", file=sys.stderr)
        return EXIT_PARAMETER

    try:
        return COMMANDS[args.command](args, argv)
    except ParameterError as e:
        print(f"[threadsim] ERROR: {e}", file=sys.stderr)
        return EXIT_PARAMETER
    except (DataError, EstimationError) as e:
        print(f"[threadsim] ERROR: {e}", file=sys.stderr)
        return EXIT_DATA
    finally:
        set_quiet(False)


if __name__ == "__main__":
    raise SystemExit(main())

#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
acceptance.py

Property checks of the simulators and estimators against their closed
forms. threadsim.py validate runs them; each check reports its value,
target, tolerance and margin.

Scales:
  default   full sample sizes, nominal tolerances
  tiny      roughly a tenth of the samples, tolerances doubled
"""

from __future__ import annotations

import tempfile
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

import analytics
import conversation
import distributions
import ingestion
import renewal
from conversation import TopicParams
from distributions import ExponentialLaw, ParetoLaw, TruncatedPareto
from errors import ParameterError, emit

TP_TARGETS = (1.5670, 1.1262)
SITE_TOPICS = 1000


def log(msg: str) -> None:
    emit("acceptance", msg)


@dataclass(frozen=True)
class Scale:
    name: str
    n_big: int  # closed-form KS checks
    n_fit: int  # estimator recovery
    n_renewal: int  # direct forward-recurrence draws
    t0_means: float
    n_topics: int
    replicates: int
    n_replicate: int
    yule_comments: int
    tol: float  # tolerance multiplier


SCALES: Dict[str, Scale] = {
    "default": Scale("default", 100_000, 10_000, 20_000, 1e4, 500, 100, 10_000, 100_000, 1.0),
    "tiny": Scale("tiny", 10_000, 2_000, 2_000, 1e3, 120, 10, 2_000, 20_000, 2.0),
}


@dataclass
class CheckResult:
    name: str
    value: float
    target: float
    tolerance: float
    mode: str = "near"  # near: |value - target| <= tol; below: value < target + tol

    @property
    def margin(self) -> float:
        if self.mode == "below":
            return self.target + self.tolerance - self.value
        return self.tolerance - abs(self.value - self.target)

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.value)) and self.margin >= 0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        rel = "<" if self.mode == "below" else "~"
        return (
            f"{status}  {self.name:<34} value={self.value:.5g}  target {rel} {self.target:g}"
            f"  tol={self.tolerance:g}  margin={self.margin:+.4g}"
        )


@dataclass
class CheckReport:
    scale: str
    seed: int
    results: List[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def add(self, *results: CheckResult) -> None:
        self.results.extend(results)


def _rng(seed: int, k: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(k)]))


def size_params(c_prime: float, exposure, gamma_prime: float = 1.0) -> TopicParams:
    """A TopicParams with the requested c' and gamma' (M = 1, c = 1)."""
    return TopicParams(
        gamma=gamma_prime,
        c0=c_prime,
        M=1,
        exposure=exposure,
        waiting=TruncatedPareto(1.0, 1e4, 1.0),
    )


def growth_params(gamma: float = 0.05, M: int = 200) -> TopicParams:
    # gamma * t^c0 reaches 1 at t = 400 for the default gamma, four mean exposures out
    return TopicParams(
        gamma=gamma,
        c0=0.5,
        M=M,
        exposure=ExponentialLaw(0.01),
        waiting=TruncatedPareto(0.01, 1e6, 1.2),
    )


def site_params(scale: Scale) -> TopicParams:
    """One shared population; about n_fit waiting times over SITE_TOPICS topics."""
    return TopicParams(
        gamma=0.05,
        c0=0.8,
        M=max(4, scale.n_fit // 350),
        exposure=ExponentialLaw(0.01),
        waiting=TruncatedPareto(1.0, 1e4, 1.5),
    )


@lru_cache(maxsize=2)
def _growth_threads(scale: Scale, seed: int):
    return conversation.simulate_threads(growth_params(), scale.n_topics, seed)


# ---------------------------------------------------------------------------
# Checks
# ---------------------------------------------------------------------------

def check_truncated_pareto(scale: Scale, seed: int) -> List[CheckResult]:
    rng = _rng(seed, 1)
    law = TruncatedPareto(1.0, 1e4, 1.5)
    x = distributions.tp_sample(law, rng, scale.n_big)
    out = [CheckResult("tp sampler KS", analytics.ks_distance(x, law.cdf), 0.0, 0.01 * scale.tol, "below")]
    for c in TP_TARGETS:
        fit = distributions.tp_mle(distributions.tp_sample(TruncatedPareto(1.0, 1e4, c), rng, scale.n_fit), 1.0)
        out.append(CheckResult(f"tp_mle recovers c={c}", fit.params["c"], c, 0.05 * scale.tol))
    return out


def check_renewal(scale: Scale, seed: int) -> List[CheckResult]:
    rng = _rng(seed, 2)
    law = TruncatedPareto(1.0, 1e3, 1.5)
    t0 = scale.t0_means * distributions.tp_mean(law)
    y = renewal.forward_recurrence_sample(law, t0, rng, scale.n_renewal)
    fr = renewal.ForwardRecurrence(law)
    ks = analytics.ks_distance(y, fr.cdf)
    density = analytics.log_binned_density(y[y > 0]).between(2.0 * law.a, law.b / 10.0)
    slope = analytics.loglog_regression(density).slope
    return [
        CheckResult("forward recurrence KS", ks, 0.0, 0.02 * scale.tol, "below"),
        CheckResult("excess density slope = -c", slope, -law.c, 0.1 * scale.tol),
    ]


def check_growth(scale: Scale, seed: int) -> List[CheckResult]:
    params = growth_params()
    threads = _growth_threads(scale, seed)
    slopes = analytics.growth_slopes(threads)
    cp = params.c_prime
    shortcut = analytics.growth_slopes(conversation.simulate_threads(params, scale.n_topics, seed, model="intensity"))
    wide = analytics.growth_slopes(conversation.simulate_threads(growth_params(0.01, 2000), scale.n_topics, seed))
    return [
        CheckResult("growth slope dN/dt = c'-1", slopes.fit_dndt.slope, cp - 1.0, 0.1 * scale.tol),
        CheckResult("growth slope N = c'", slopes.fit_n.slope, cp, 0.05 * scale.tol),
        CheckResult("growth slope difference = 1", slopes.difference, 1.0, 0.1 * scale.tol),
        CheckResult("intensity model slope N = c'", shortcut.fit_n.slope, cp, 0.05 * scale.tol),
        CheckResult("slope N = c' (gamma=0.01, M=2000)", wide.fit_n.slope, cp, 0.05 * scale.tol),
    ]


def check_size_trichotomy(scale: Scale, seed: int) -> List[CheckResult]:
    rng = _rng(seed, 4)
    expected = {0.5: "light", 1.0: "exponential", 2.0: "heavy"}
    out = []
    for cp, verdict in expected.items():
        params = size_params(cp, ExponentialLaw(0.001))
        sizes = conversation.simulate_size_analytic(params, rng, scale.n_fit, discrete=False)
        shape = distributions.weibull_mle(sizes).params["shape"]
        out.append(CheckResult(f"weibull shape = 1/c' (c'={cp})", shape * cp, 1.0, 0.05 * scale.tol))
        hits = 0
        for _ in range(scale.replicates):
            sizes = conversation.simulate_size_analytic(params, rng, scale.n_replicate, discrete=False)
            hits += analytics.tail_classify(sizes).verdict == verdict
        share = hits / scale.replicates
        out.append(CheckResult(f"tail verdict {verdict} (c'={cp})", share, 1.0, 0.05 * scale.tol))

    for label, exposure in (("exponential", ExponentialLaw(0.001)), ("pareto", ParetoLaw(1.0, 1.5))):
        params = size_params(0.5, exposure, gamma_prime=2.0)
        sizes = conversation.simulate_size_analytic(params, rng, scale.n_big)
        ks = analytics.ks_distance(sizes, lambda n: conversation.predicted_size_cdf(params, n), discrete=True)
        out.append(CheckResult(f"size KS vs closed form ({label})", ks, 0.0, 0.015 * scale.tol, "below"))
    return out


def check_pareto_sizes(scale: Scale, seed: int) -> List[CheckResult]:
    rng = _rng(seed, 5)
    params = size_params(0.5, ParetoLaw(1.0, 1.5))
    sizes = conversation.simulate_size_analytic(params, rng, scale.n_big, discrete=False)
    density = analytics.log_binned_density(sizes, min_count=10)
    slope = analytics.loglog_regression(density).slope
    verdict = analytics.tail_classify(sizes)
    return [
        CheckResult("pareto size density slope", slope, -(1.5 / 0.5 + 1.0), 0.2 * scale.tol),
        CheckResult("pareto sizes above exponential", -verdict.above_exponential, 0.0, 0.0, "below"),
    ]


def _yule_forest(exposure, scale: Scale, rng: np.random.Generator, delta0: float = 1.0):
    params = size_params(1.0, exposure)
    threads = []
    total = 0
    while total < scale.yule_comments:
        n = int(conversation.simulate_size_analytic(params, rng))
        threads.append(conversation.grow_yule_tree(n, delta0, rng, topic_id=conversation.topic_name(len(threads))))
        total += n
    return threads


def _indegree_checks(threads, label: str, scale: Scale, delta0: float = 1.0) -> List[CheckResult]:
    hist = conversation.indegree_histogram(threads)
    curve = analytics.indegree_ccdf(hist)
    gap = float(np.max(np.abs(curve.y - conversation.exact_indegree_ccdf(delta0, curve.x))))
    fit = analytics.indegree_tail_fit(hist, delta0=delta0)
    return [
        CheckResult(f"in-degree sup distance ({label})", gap, 0.0, 0.02 * scale.tol, "below"),
        CheckResult(f"in-degree tail exponent ({label})", fit.slope, -(1.0 + delta0), 0.1 * scale.tol),
    ]


def check_indegree(scale: Scale, seed: int) -> List[CheckResult]:
    rng = _rng(seed, 6)
    out = []
    for label, exposure in (("exponential", ExponentialLaw(0.001)), ("pareto", ParetoLaw(300.0, 1.5))):
        out.extend(_indegree_checks(_yule_forest(exposure, scale, rng), label, scale))
    return out


def check_pipeline(scale: Scale, seed: int) -> List[CheckResult]:
    rng = _rng(seed, 7)
    params = growth_params()
    threads = _growth_threads(scale, seed)
    out = []
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        events = tmp / "events.jsonl"
        ingestion.write_events(events, threads)
        corpus = ingestion.parse_corpus(events)
        parsed = ingestion.corpus_threads(corpus)
        exact = len(parsed) == len(threads) and all(_triples(a) == _triples(b) for a, b in zip(threads, parsed))
        out.append(CheckResult("pipeline round trip exact", float(exact), 1.0, 0.0))
        slopes = analytics.growth_slopes(parsed)
        out.append(CheckResult("pipeline growth slope N = c'", slopes.fit_n.slope, params.c_prime, 0.05 * scale.tol))

        exposure = distributions.fit_exposure(ingestion.exposure_durations(corpus))
        out.append(CheckResult("pipeline exposure family", float(exposure.family == "exponential"), 1.0, 0.0))

        ratios = [
            ingestion.before_after_ratio(t.minutes(), ingestion.topic_inflection(t))
            for t in corpus.topics.values()
            if t.comments
        ]
        out.append(CheckResult("pipeline before/after ratio", min(ratios), 1.0, 0.0))

        shared = site_params(scale)
        site = conversation.simulate_site(shared, SITE_TOPICS, seed)
        site_file = tmp / "site.jsonl"
        ingestion.write_events(site_file, site.threads, activity=site.activity())
        waits = ingestion.waiting_times(ingestion.parse_corpus(site_file))
        fit = distributions.tp_mle(waits, float(waits.min()))
        out.append(CheckResult("pipeline waiting-time c", fit.params["c"], shared.c, 0.05 * scale.tol))

        forest = tmp / "forest.jsonl"
        ingestion.write_events(forest, _yule_forest(ExponentialLaw(0.001), scale, rng))
        hist = conversation.indegree_histogram(ingestion.corpus_threads(ingestion.parse_corpus(forest)))
        fit = analytics.indegree_tail_fit(hist, delta0=1.0)
        out.append(CheckResult("pipeline in-degree tail exponent", fit.slope, -2.0, 0.1 * scale.tol))
    return out


def _triples(thread):
    return [(thread.topic_id, e.time, e.parent) for e in thread.events]


def _events_bytes(threads, activity=None) -> bytes:
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "events.jsonl"
        ingestion.write_events(path, threads, header="determinism", activity=activity)
        return path.read_bytes()


def check_determinism(scale: Scale, seed: int) -> List[CheckResult]:
    params = growth_params()
    n = min(24, scale.n_topics)
    first = _events_bytes(conversation.simulate_threads(params, n, seed, workers=1))
    again = _events_bytes(conversation.simulate_threads(params, n, seed, workers=1))
    pooled = _events_bytes(conversation.simulate_threads(params, n, seed, workers=2))
    site_bytes = [
        _events_bytes(site.threads, site.activity())
        for site in (conversation.simulate_site(site_params(scale), n, seed) for _ in range(2))
    ]
    return [
        CheckResult("determinism across runs and workers", float(first == again == pooled), 1.0, 0.0),
        CheckResult("shared population determinism", float(site_bytes[0] == site_bytes[1]), 1.0, 0.0),
    ]


CHECKS: Dict[str, Callable[[Scale, int], List[CheckResult]]] = {
    "truncated pareto": check_truncated_pareto,
    "renewal": check_renewal,
    "growth": check_growth,
    "size trichotomy": check_size_trichotomy,
    "pareto sizes": check_pareto_sizes,
    "in-degree": check_indegree,
    "pipeline": check_pipeline,
    "determinism": check_determinism,
}


def run_checks(scale: str = "default", seed: int = 0, only: Optional[Sequence[str]] = None) -> CheckReport:
    if scale not in SCALES:
        raise ParameterError(f"unknown scale {scale!r}; expected one of {tuple(SCALES)}")
    unknown = set(only or ()) - set(CHECKS)
    if unknown:
        raise ParameterError(f"unknown checks: {sorted(unknown)}")
    sc = SCALES[scale]
    report = CheckReport(scale, seed)
    for name, check in CHECKS.items():
        if only and name not in only:
            continue
        log(f"running {name} checks")
        report.add(*check(sc, seed))
    _growth_threads.cache_clear()
    return report

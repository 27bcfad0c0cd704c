#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
conversation.py

Generative model of one conversation thread and its closed-form laws.

A topic stays in the site's "new" column for an exposure duration T.
M users comment anywhere on the site as independent renewal processes;
a user's comment event at time t after topic creation lands on this
topic with probability min(1, gamma * t^c0). Each accepted comment
replies to an existing node i (root post included) with probability
proportional to k_i + delta0 (Yule rule).

With c' = -c + c0 + 1 and gamma' = gamma * M:

  dN/dt ~ t^(c'-1),  N(t) ~ t^c'
  N(T) = gamma' T^c'   -> Weibull sizes (exponential T), Pareto sizes (Pareto T)
  P(k < l) = 1 - (l/delta0 + 1)^(-1-delta0)   for in-degrees

simulate_threads gives every topic its own population of M users.
simulate_site runs one population on one site clock across all topics, so
every comment a user makes is on record and the waiting times can be read
back from the output. Simulated stamps are whole seconds.

Usage (library):
  params = TopicParams(gamma=0.01, c0=0.5, M=2000,
                       exposure=ExponentialLaw(0.001),
                       waiting=TruncatedPareto(0.01, 1e6, 1.2))
  threads = simulate_threads(params, n=500, base_seed=7)
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import gammaln

from distributions import (
    ExponentialLaw,
    ExposureLaw,
    ParetoLaw,
    TruncatedPareto,
    WeibullLaw,
    exposure_sample,
    tp_mean,
    tp_sample,
)
from errors import ParameterError, emit
from renewal import equilibrium_excess_sample, forward_recurrence_sample, renewal_ticks

USER_AGES = ("equilibrium", "warmed", "fresh")
CANDIDATE_RULES = ("next", "all")
THREAD_MODELS = ("agent", "intensity")
POPULATIONS = ("per-topic", "shared")
WARMUP_MEANS = 1000.0  # "warmed" users run this many mean waiting times before topic creation
TICKS_PER_MINUTE = 60  # simulated stamps are whole seconds
DEFAULT_TOPIC_INTERVAL = 1.0  # minutes between topic creations on the site clock
EVENT_LIMIT = 2_000_000  # expected candidate events one simulation may generate


def log(msg: str) -> None:
    emit("conversation", msg)


@dataclass(frozen=True)
class TopicParams:
    gamma: float
    c0: float
    M: int
    exposure: ExposureLaw
    waiting: TruncatedPareto
    delta0: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.gamma) and self.gamma >= 0):
            raise ParameterError(f"gamma must be >= 0, got {self.gamma}")
        if not (math.isfinite(self.c0) and self.c0 >= 0):
            raise ParameterError(f"c0 must be >= 0, got {self.c0}")
        if int(self.M) != self.M or self.M < 1:
            raise ParameterError(f"M must be a positive integer, got {self.M}")
        if not (math.isfinite(self.delta0) and self.delta0 > 0):
            raise ParameterError(f"delta0 must be > 0, got {self.delta0}")
        if not isinstance(self.exposure, (ExponentialLaw, ParetoLaw)):
            raise ParameterError(f"exposure must be an exponential or Pareto law, got {self.exposure!r}")
        if not isinstance(self.waiting, TruncatedPareto):
            raise ParameterError(f"waiting must be a truncated Pareto law, got {self.waiting!r}")
        if self.c_prime <= 0:
            raise ParameterError(
                f"non-growing regime: c' = -c + c0 + 1 = {self.c_prime:g} <= 0 (c={self.c}, c0={self.c0})"
            )

    @property
    def c(self) -> float:
        return self.waiting.c

    @property
    def c_prime(self) -> float:
        return -self.c + self.c0 + 1.0

    @property
    def gamma_prime(self) -> float:
        return self.gamma * self.M


@dataclass
class CommentEvent:
    id: int
    parent: Optional[int]  # None only for the root post
    time: float
    user: Optional[int] = None


@dataclass
class Thread:
    params: Optional[TopicParams]
    T: float
    events: List[CommentEvent]
    topic_id: str = ""
    capped: int = 0  # candidate events whose acceptance probability hit 1
    created_at: float = 0.0  # site clock, seconds
    users_shared: bool = False  # user ids name the same person in every topic

    @classmethod
    def root_only(
        cls, params: Optional[TopicParams], T: float, topic_id: str = "", created_at: float = 0.0
    ) -> "Thread":
        return cls(
            params=params,
            T=float(T),
            events=[CommentEvent(0, None, 0.0)],
            topic_id=topic_id,
            created_at=float(created_at),
        )

    @property
    def size(self) -> int:
        """N(T): comments only, the root post is not counted."""
        return len(self.events) - 1

    def comment_times(self) -> np.ndarray:
        return np.array([e.time for e in self.events[1:]], dtype=float)

    def indegrees(self) -> np.ndarray:
        parents = [e.parent for e in self.events[1:]]
        return np.bincount(np.asarray(parents, dtype=int), minlength=len(self.events))

    def validate(self) -> None:
        root = self.events[0]
        if root.id != 0 or root.parent is not None or root.time != 0.0:
            raise ParameterError(f"thread {self.topic_id!r}: event 0 must be the root at time 0")
        last = 0.0
        for i, e in enumerate(self.events[1:], start=1):
            if e.id != i or e.parent is None or not 0 <= e.parent < e.id:
                raise ParameterError(f"thread {self.topic_id!r}: bad parent link at event {i}")
            if e.time < last or e.time > self.T:
                raise ParameterError(f"thread {self.topic_id!r}: event {i} time {e.time} out of order")
            last = e.time


# ---------------------------------------------------------------------------
# Structure
# ---------------------------------------------------------------------------

def attach_yule(thread: Thread, delta0: float, rng: np.random.Generator) -> int:
    """
    Pick the parent of a new comment: node j with probability
    (k_j + delta0) / sum_i (k_i + delta0). Sampling is O(1): the in-degree
    part of the weight is hit by picking a random existing edge.
    """
    n = len(thread.events)
    if n == 1:
        return 0
    edges = n - 1
    if rng.random() * (edges + n * delta0) < edges:
        j = int(rng.integers(1, n))
        return int(thread.events[j].parent)
    return int(rng.integers(0, n))


def grow_yule_tree(n_comments: int, delta0: float, rng: np.random.Generator, topic_id: str = "") -> Thread:
    """A structure-only thread of n_comments replies; times are evenly spaced on (0, 1]."""
    thread = Thread.root_only(None, 1.0, topic_id)
    for i in range(1, n_comments + 1):
        parent = attach_yule(thread, delta0, rng)
        thread.events.append(CommentEvent(i, parent, i / n_comments))
    return thread


def indegree_histogram(threads: Union[Thread, Iterable[Thread]], include_root: bool = True) -> Dict[int, int]:
    if isinstance(threads, Thread):
        threads = [threads]
    counts: Dict[int, int] = {}
    for thread in threads:
        degrees = thread.indegrees()
        if not include_root:
            degrees = degrees[1:]
        for k, m in zip(*np.unique(degrees, return_counts=True)):
            counts[int(k)] = counts.get(int(k), 0) + int(m)
    return dict(sorted(counts.items()))


# ---------------------------------------------------------------------------
# Simulators
# ---------------------------------------------------------------------------

def to_ticks(minutes) -> np.ndarray:
    """Minutes rounded to whole seconds, as integers."""
    return np.rint(np.asarray(minutes, dtype=float) * TICKS_PER_MINUTE).astype(np.int64)


def _exposure_ticks(T: float) -> int:
    return max(1, int(to_ticks(T)))


def typical_exposure(law: ExposureLaw) -> float:
    """Mean exposure duration, or the median when the mean is infinite."""
    if isinstance(law, ExponentialLaw):
        return law.mean
    if law.alpha > 1.0:
        return law.alpha * law.t_min / (law.alpha - 1.0)
    return law.t_min * 2.0 ** (1.0 / law.alpha)


def expected_candidates(params: TopicParams, candidates: str) -> float:
    """Expected candidate comment events in one per-topic agent thread."""
    if candidates == "next":
        return float(params.M)
    return params.M * (typical_exposure(params.exposure) / tp_mean(params.waiting) + 1.0)


def _first_events(params: TopicParams, rng: np.random.Generator, user_age: str) -> np.ndarray:
    law, M = params.waiting, int(params.M)
    if user_age == "equilibrium":
        return equilibrium_excess_sample(law, rng, M)
    if user_age == "warmed":
        return forward_recurrence_sample(law, WARMUP_MEANS * tp_mean(law), rng, M)
    if user_age == "fresh":
        return tp_sample(law, rng, M)
    raise ParameterError(f"user_age must be one of {USER_AGES}, got {user_age!r}")


def _candidate_events(params, first: np.ndarray, T: float, rng, candidates: str):
    if candidates == "next":
        keep = first <= T
        return first[keep], np.flatnonzero(keep)
    if candidates != "all":
        raise ParameterError(f"candidates must be one of {CANDIDATE_RULES}, got {candidates!r}")
    clock = first.copy()
    active = np.flatnonzero(clock <= T)
    times, users = [], []
    while active.size:
        times.append(clock[active].copy())
        users.append(active)
        clock[active] += tp_sample(params.waiting, rng, active.size)
        active = active[clock[active] <= T]
    if not times:
        return np.empty(0), np.empty(0, dtype=int)
    return np.concatenate(times), np.concatenate(users)


def simulate_thread_agent(
    params: TopicParams,
    rng: np.random.Generator,
    user_age: str = "equilibrium",
    candidates: str = "next",
    T: Optional[float] = None,
    topic_id: str = "",
) -> Thread:
    """
    Event-level simulation of one thread.

    user_age    equilibrium: users have been commenting for a long time when the
                topic appears (closed-form stationary excess time);
                warmed: same, reached by direct renewal simulation;
                fresh: every user's renewal process starts at topic creation.
    candidates  next: only each user's next comment event after creation can
                land on the topic; all: every renewal event in [0, T] can.

    T and the comment times are rounded to whole seconds.
    """
    if T is None:
        T = exposure_sample(params.exposure, rng)
    T = _exposure_ticks(T) / TICKS_PER_MINUTE
    first = _first_events(params, rng, user_age)
    times, users = _candidate_events(params, first, T, rng, candidates)

    pressure = params.gamma * times ** params.c0
    accepted = rng.random(times.size) < np.minimum(1.0, pressure)
    capped = int(np.count_nonzero(pressure > 1.0))
    ticks, users = to_ticks(times[accepted]), users[accepted]
    order = np.lexsort((users, ticks))

    thread = Thread.root_only(params, T, topic_id)
    thread.capped = capped
    for tick, u in zip(ticks[order], users[order]):
        parent = attach_yule(thread, params.delta0, rng)
        thread.events.append(CommentEvent(len(thread.events), parent, float(tick) / TICKS_PER_MINUTE, int(u)))
    return thread


def simulate_thread_intensity(
    params: TopicParams,
    rng: np.random.Generator,
    T: Optional[float] = None,
    topic_id: str = "",
) -> Thread:
    """
    Aggregate shortcut: comments arrive as a Poisson process with rate
    gamma' * c' * t^(c'-1), so E[N(T)] = gamma' * T^c'. No users are simulated.
    """
    if T is None:
        T = exposure_sample(params.exposure, rng)
    T = _exposure_ticks(T) / TICKS_PER_MINUTE
    count = int(rng.poisson(params.gamma_prime * T ** params.c_prime))
    ticks = np.sort(to_ticks(T * rng.random(count) ** (1.0 / params.c_prime)))
    thread = Thread.root_only(params, T, topic_id)
    for tick in ticks:
        parent = attach_yule(thread, params.delta0, rng)
        thread.events.append(CommentEvent(len(thread.events), parent, float(tick) / TICKS_PER_MINUTE))
    return thread


def simulate_size_analytic(params: TopicParams, rng: np.random.Generator, size=None, discrete: bool = True, T=None):
    """N(T) = gamma' * T^c' with T drawn from the exposure law (or forced)."""
    if T is None:
        T = exposure_sample(params.exposure, rng, size)
    n = params.gamma_prime * np.asarray(T, dtype=float) ** params.c_prime
    if discrete:
        n = np.floor(n + 0.5)
    if np.ndim(n) == 0:
        return int(n) if discrete else float(n)
    return n


def thread_rng(base_seed: int, k: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(base_seed), int(k)]))


def topic_name(k: int) -> str:
    return f"t{k:05d}"


def _interval_ticks(topic_interval: float) -> int:
    if not (math.isfinite(topic_interval) and topic_interval >= 0):
        raise ParameterError(f"topic_interval must be >= 0 minutes, got {topic_interval}")
    return int(to_ticks(topic_interval))


def _simulate_one(job) -> Thread:
    params, base_seed, k, step, model, options = job
    simulate = simulate_thread_agent if model == "agent" else simulate_thread_intensity
    thread = simulate(params, thread_rng(base_seed, k), topic_id=topic_name(k), **options)
    thread.created_at = float(k * step)
    return thread


def simulate_threads(
    params: TopicParams,
    n: int,
    base_seed: int,
    workers: int = 1,
    model: str = "agent",
    topic_interval: float = DEFAULT_TOPIC_INTERVAL,
    **options,
) -> List[Thread]:
    """
    n simulated threads, each with its own independent population of M
    users; thread k always uses stream (base_seed, k) and is created
    k * topic_interval minutes into the run.
    """
    if model not in THREAD_MODELS:
        raise ParameterError(f"model must be one of {THREAD_MODELS}, got {model!r}")
    step = _interval_ticks(topic_interval)
    if model == "agent":
        load = expected_candidates(params, options.get("candidates", "next"))
        if load > EVENT_LIMIT:
            raise ParameterError(
                f"about {load:.3g} candidate events per thread (limit {EVENT_LIMIT:g}); "
                "use --candidates next, fewer users or a larger waiting-time floor a"
            )
    jobs = [(params, base_seed, k, step, model, options) for k in range(n)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            threads = list(pool.map(_simulate_one, jobs, chunksize=max(1, n // (4 * workers))))
    else:
        threads = [_simulate_one(job) for job in jobs]
    capped = sum(t.capped for t in threads)
    if capped:
        log(f"WARNING: {capped} candidate events had gamma*t^c0 > 1 (acceptance capped at 1)")
    log(f"simulated {n} threads, {sum(t.size for t in threads)} comments")
    return threads


def simulate_sizes(params: TopicParams, n: int, base_seed: int, discrete: bool = True):
    """(T, N) arrays for n topics from the analytic sampler."""
    rng = np.random.default_rng(np.random.SeedSequence([int(base_seed)]))
    T = exposure_sample(params.exposure, rng, n)
    return T, simulate_size_analytic(params, rng, discrete=discrete, T=T)


# ---------------------------------------------------------------------------
# Shared population
# ---------------------------------------------------------------------------

@dataclass
class Site:
    threads: List[Thread]
    activity_users: np.ndarray
    activity_ticks: np.ndarray  # site clock, seconds
    capped: int = 0
    collisions: int = 0  # events accepted by more than one topic

    def activity(self) -> Iterable[Tuple[int, int]]:
        """(user, seconds) for every comment made outside the simulated topics."""
        return zip(self.activity_users.tolist(), self.activity_ticks.tolist())


def expected_site_events(params: TopicParams, n: int, topic_interval: float, candidates: str = "next") -> float:
    """Expected renewal events, plus candidate pairs under the all rule, for simulate_site."""
    span = max(n - 1, 0) * topic_interval + typical_exposure(params.exposure)
    events = params.M * (span / tp_mean(params.waiting) + 1.0)
    if candidates == "all":
        overlap = typical_exposure(params.exposure) / topic_interval + 1.0 if topic_interval > 0 else n
        events *= 1.0 + min(float(n), overlap)
    return events


def _site_candidates(ticks: np.ndarray, created: np.ndarray, removed: np.ndarray, candidates: str):
    """(topic, event index) pairs for one user's trace."""
    lo = np.searchsorted(ticks, created, side="left")
    if candidates == "next":
        k = np.flatnonzero(lo < ticks.size)
        idx = lo[k]
        keep = ticks[idx] <= removed[k]
        return k[keep], idx[keep]
    hi = np.searchsorted(ticks, removed, side="right")
    counts = hi - lo
    k = np.repeat(np.arange(created.size), counts)
    within = np.arange(int(counts.sum())) - np.repeat(np.cumsum(counts) - counts, counts)
    return k, np.repeat(lo, counts) + within


def simulate_site(
    params: TopicParams,
    n: int,
    base_seed: int,
    topic_interval: float = DEFAULT_TOPIC_INTERVAL,
    user_age: str = "equilibrium",
    candidates: str = "next",
) -> Site:
    """
    n topics on one site clock, created topic_interval minutes apart, and one
    renewal trace per user for the whole run. A user's comment event at site
    time s is a candidate for every topic k alive at s (next: only the user's
    first event at or after the topic's creation) and topic k takes it with
    probability min(1, gamma * (s - created_k)^c0). An event taken by several
    topics lands on one of them, picked uniformly. Events no topic takes are
    comments elsewhere on the site; they are returned as activity.

    user_age places each user's first event: equilibrium and warmed as in
    simulate_thread_agent, fresh starts every trace at the beginning of the run.
    """
    if n < 1:
        raise ParameterError(f"need at least one topic, got {n}")
    if candidates not in CANDIDATE_RULES:
        raise ParameterError(f"candidates must be one of {CANDIDATE_RULES}, got {candidates!r}")
    step = _interval_ticks(topic_interval)
    load = expected_site_events(params, n, topic_interval, candidates)
    if load > EVENT_LIMIT:
        raise ParameterError(
            f"a shared population would generate about {load:.3g} events (limit {EVENT_LIMIT:g}); "
            "lower M or the topic count, or raise the waiting-time floor a"
        )
    exposure_rng, user_rng, accept_rng = (
        np.random.default_rng(s) for s in np.random.SeedSequence([int(base_seed)]).spawn(3)
    )
    created = step * np.arange(n, dtype=np.int64)
    lengths = np.maximum(1, to_ticks(exposure_sample(params.exposure, exposure_rng, n)))
    removed = created + lengths
    horizon = int(removed.max())

    starts = to_ticks(_first_events(params, user_rng, user_age))
    traces = [renewal_ticks(params.waiting, int(s), horizon, user_rng, TICKS_PER_MINUTE) for s in starts]
    stamps = np.concatenate(traces) if traces else np.empty(0, dtype=np.int64)
    owners = np.repeat(np.arange(len(traces)), [tr.size for tr in traces])

    topics, events = [], []
    offset = 0
    for tr in traces:
        k, idx = _site_candidates(tr, created, removed, candidates)
        topics.append(k)
        events.append(offset + idx)
        offset += tr.size
    topic = np.concatenate(topics).astype(np.int64)
    event = np.concatenate(events).astype(np.int64)

    age = (stamps[event] - created[topic]) / TICKS_PER_MINUTE
    pressure = params.gamma * age ** params.c0
    accepted = np.flatnonzero(accept_rng.random(topic.size) < np.minimum(1.0, pressure))
    shuffled = accepted[accept_rng.permutation(accepted.size)]
    _, first = np.unique(event[shuffled], return_index=True)
    chosen = shuffled[first]

    ev, tp = event[chosen], topic[chosen]
    order = np.lexsort((owners[ev], stamps[ev], tp))
    ev, tp = ev[order], tp[order]
    bounds = np.searchsorted(tp, np.arange(n + 1))
    threads = []
    for k in range(n):
        thread = Thread.root_only(params, lengths[k] / TICKS_PER_MINUTE, topic_name(k), created_at=float(created[k]))
        thread.users_shared = True
        rng = thread_rng(base_seed, k)
        for j in ev[bounds[k]:bounds[k + 1]]:
            parent = attach_yule(thread, params.delta0, rng)
            minutes = float(stamps[j] - created[k]) / TICKS_PER_MINUTE
            thread.events.append(CommentEvent(len(thread.events), parent, minutes, int(owners[j])))
        threads.append(thread)

    elsewhere = np.ones(stamps.size, dtype=bool)
    elsewhere[ev] = False
    rest = np.flatnonzero(elsewhere)
    rest = rest[np.lexsort((owners[rest], stamps[rest]))]
    site = Site(
        threads=threads,
        activity_users=owners[rest],
        activity_ticks=stamps[rest],
        capped=int(np.count_nonzero(pressure > 1.0)),
        collisions=int(accepted.size - chosen.size),
    )
    if site.capped:
        log(f"WARNING: {site.capped} candidate events had gamma*t^c0 > 1 (acceptance capped at 1)")
    if site.collisions:
        log(f"{site.collisions} events were taken by more than one topic; each kept on one")
    log(
        f"simulated a site of {n} topics and {params.M} users: "
        f"{ev.size} comments on topics, {rest.size} elsewhere"
    )
    return site


# ---------------------------------------------------------------------------
# Closed forms
# ---------------------------------------------------------------------------

def _check_sizing(params: TopicParams) -> None:
    if params.gamma_prime <= 0:
        raise ParameterError("closed-form size laws need gamma * M > 0")


def size_law(params: TopicParams):
    _check_sizing(params)
    cp, gp = params.c_prime, params.gamma_prime
    if isinstance(params.exposure, ExponentialLaw):
        return WeibullLaw(shape=1.0 / cp, scale=gp / params.exposure.rate ** cp)
    return ParetoLaw(t_min=gp * params.exposure.t_min ** cp, alpha=params.exposure.alpha / cp)


def predicted_size_cdf(params: TopicParams, n):
    """P(N(T) <= n) = P(T <= (n / gamma')^(1/c'))."""
    _check_sizing(params)
    na = np.asarray(n, dtype=float)
    x = (np.maximum(na, 0.0) / params.gamma_prime) ** (1.0 / params.c_prime)
    out = np.where(na > 0, params.exposure.cdf(x), 0.0)
    return float(out) if np.ndim(n) == 0 else out


def predicted_size_pdf(params: TopicParams, n):
    _check_sizing(params)
    cp, gp = params.c_prime, params.gamma_prime
    na = np.asarray(n, dtype=float)
    pos = na > 0
    x = (np.where(pos, na, gp) / gp) ** (1.0 / cp)
    law = params.exposure
    if isinstance(law, ExponentialLaw):
        f_T = law.rate * np.exp(-law.rate * x)
    else:
        f_T = np.where(x >= law.t_min, law.alpha * law.t_min ** law.alpha * x ** (-law.alpha - 1.0), 0.0)
    out = np.where(pos, f_T * x / (cp * np.where(pos, na, 1.0)), 0.0)
    return float(out) if np.ndim(n) == 0 else out


def predicted_indegree_cdf(delta0: float, l):
    """P(k_i(T) < l) = 1 - (l/delta0 + 1)^(-1-delta0); the same for every exposure law."""
    if not delta0 > 0:
        raise ParameterError(f"delta0 must be > 0, got {delta0}")
    la = np.asarray(l, dtype=float)
    out = np.where(la > 0, -np.expm1((-1.0 - delta0) * np.log1p(np.maximum(la, 0.0) / delta0)), 0.0)
    return float(out) if np.ndim(l) == 0 else out


def exact_indegree_ccdf(delta0: float, k):
    """P(K >= k) for the discrete attachment rule at stationarity."""
    if not delta0 > 0:
        raise ParameterError(f"delta0 must be > 0, got {delta0}")
    ka = np.ceil(np.maximum(np.asarray(k, dtype=float), 0.0))
    out = np.exp(
        gammaln(ka + delta0) + gammaln(1.0 + 2.0 * delta0) - gammaln(delta0) - gammaln(ka + 1.0 + 2.0 * delta0)
    )
    return float(out) if np.ndim(k) == 0 else out


def meanfield_indegree(t_i, T: float, c_prime: float, delta0: float):
    """k_i(T) = delta0 * ((T / t_i)^(c' / (1 + delta0)) - 1) for a comment created at t_i."""
    ta = np.asarray(t_i, dtype=float)
    if np.any(ta <= 0) or np.any(ta > T):
        raise ParameterError("creation times must lie in (0, T]")
    out = delta0 * np.expm1(c_prime / (1.0 + delta0) * np.log(T / ta))
    return float(out) if np.ndim(t_i) == 0 else out


def thread_summary(threads: Sequence[Thread]) -> List[Dict[str, object]]:
    rows = []
    for t in threads:
        degrees = t.indegrees()
        rows.append(
            {"topic": t.topic_id, "T": t.T, "N": t.size, "max_indegree": int(degrees.max()) if degrees.size else 0}
        )
    return rows

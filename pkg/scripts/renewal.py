#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
renewal.py

One user's commenting events as a renewal process with truncated-Pareto
inter-arrival times, and the forward recurrence (excess) time Y(t0):
the time from an observation instant t0 until the user's next comment.

For t0 -> infinity the key renewal theorem gives

    P{Y <= y} = (1/mu) * integral_0^y (1 - F(x)) dx,   0 <= y <= b

which this module evaluates in closed form. forward_recurrence_sample()
gets Y(t0) by simulating events directly, so the limit itself is testable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List

import numpy as np

from distributions import TruncatedPareto, tp_mean, tp_sample
from errors import ParameterError

EXCESS_GRID_POINTS = 4096


@dataclass
class RenewalTrace:
    event_times: np.ndarray
    horizon: float

    def __len__(self) -> int:
        return int(self.event_times.size)


@dataclass(frozen=True)
class ForwardRecurrence:
    law: TruncatedPareto

    def cdf(self, y):
        return forward_recurrence_cdf(self, y)

    def pdf(self, y):
        return forward_recurrence_pdf(self, y)


def simulate_renewal(law: TruncatedPareto, horizon: float, rng: np.random.Generator) -> RenewalTrace:
    """Event times are cumulative sums of i.i.d. waiting times, cut at horizon."""
    if not (horizon > 0 and math.isfinite(horizon)):
        raise ParameterError(f"horizon must be a positive number, got {horizon}")
    chunk = int(1.2 * horizon / tp_mean(law)) + 16
    pieces: List[np.ndarray] = []
    last = 0.0
    while last <= horizon:
        steps = last + np.cumsum(tp_sample(law, rng, chunk))
        pieces.append(steps)
        last = float(steps[-1])
    times = np.concatenate(pieces)
    return RenewalTrace(event_times=times[times <= horizon], horizon=float(horizon))


def renewal_ticks(
    law: TruncatedPareto, start: int, horizon: int, rng: np.random.Generator, ticks_per_minute: int = 60
) -> np.ndarray:
    """
    One user's event times on an integer tick grid: a first event at start,
    then waiting times rounded to whole ticks (never below one), cut at horizon.
    """
    if ticks_per_minute < 1:
        raise ParameterError(f"ticks_per_minute must be >= 1, got {ticks_per_minute}")
    if start > horizon:
        return np.empty(0, dtype=np.int64)
    chunk = int(1.2 * (horizon - start) / (tp_mean(law) * ticks_per_minute)) + 16
    pieces: List[np.ndarray] = [np.array([start], dtype=np.int64)]
    last = int(start)
    while last <= horizon:
        gaps = np.maximum(1, np.rint(tp_sample(law, rng, chunk) * ticks_per_minute)).astype(np.int64)
        steps = last + np.cumsum(gaps)
        pieces.append(steps)
        last = int(steps[-1])
    times = np.concatenate(pieces)
    return times[times <= horizon]


def _survival(law: TruncatedPareto, y: np.ndarray) -> np.ndarray:
    log_rho = math.log(law.a / law.b)
    rho_c = math.exp(law.c * log_rho)
    safe = np.clip(y, law.a, law.b)
    body = ((safe / law.a) ** (-law.c) - rho_c) / -math.expm1(law.c * log_rho)
    return np.where(y < law.a, 1.0, np.where(y >= law.b, 0.0, body))


def forward_recurrence_pdf(fr: ForwardRecurrence, y):
    ya = np.asarray(y, dtype=float)
    out = np.where(ya >= 0, _survival(fr.law, ya) / tp_mean(fr.law), 0.0)
    return float(out) if np.ndim(y) == 0 else out


def forward_recurrence_cdf(fr: ForwardRecurrence, y):
    law = fr.law
    mu = tp_mean(law)
    ya = np.asarray(y, dtype=float)
    a, c = law.a, law.c
    log_rho = math.log(a / law.b)
    rho_c = math.exp(c * log_rho)

    u = np.clip(ya, a, law.b) / a
    if abs(c - 1.0) < 1e-12:
        head = np.log(u)
    else:
        head = (u ** (1.0 - c) - 1.0) / (1.0 - c)
    # integral of the survival function over [a, y]
    tail = (a * head - rho_c * (np.clip(ya, a, law.b) - a)) / -math.expm1(c * log_rho)
    body = (a + tail) / mu

    out = np.where(ya <= 0, 0.0, np.where(ya <= a, ya / mu, np.where(ya >= law.b, 1.0, body)))
    out = np.clip(out, 0.0, 1.0)
    return float(out) if np.ndim(y) == 0 else out


def forward_recurrence_sample(law: TruncatedPareto, t0: float, rng: np.random.Generator, size=None):
    """
    Run independent renewal processes from time 0 past t0 and return the
    time from t0 to each one's next event. t0 should be large against the
    mean waiting time for the equilibrium law to apply.
    """
    if not (t0 > 0 and math.isfinite(t0)):
        raise ParameterError(f"t0 must be a positive number, got {t0}")
    n = 1 if size is None else int(np.prod(size))
    clock = np.zeros(n)
    active = np.arange(n)
    while active.size:
        clock[active] += tp_sample(law, rng, active.size)
        active = active[clock[active] <= t0]
    excess = clock - t0
    if size is None:
        return float(excess[0])
    return excess.reshape(size)


def equilibrium_excess_sample(law: TruncatedPareto, rng: np.random.Generator, size=None):
    """Draw from the limiting forward-recurrence law by inverting its CDF on a grid."""
    fr = ForwardRecurrence(law)
    head = np.linspace(0.0, law.a, 64, endpoint=False)
    tail = np.geomspace(law.a, law.b, EXCESS_GRID_POINTS)
    grid = np.concatenate([head, tail])
    probs = forward_recurrence_cdf(fr, grid)
    u = rng.random(size)
    out = np.interp(u, probs, grid)
    return float(out) if size is None else out

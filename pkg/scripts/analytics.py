#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
analytics.py

Empirical-distribution helpers for thread data:

  ccdf / log_binned_density        curves for semi-log and log-log plots
  loglog_regression                OLS slope with standard error
  ks_distance                      sup gap between a sample and a law
  tail_classify                    heavy / light / exponential verdict
  growth_curves / growth_slopes    N(t) and dN/dt pooled over threads
  indegree_ccdf / indegree_tail_fit / estimate_delta0

Curves are written as plot-ready CSV (x,y); fits as name,value rows.
Nothing here draws random numbers.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import stats

from conversation import Thread
from distributions import FitResult, WeibullLaw, weibull_mle
from errors import DataError, EstimationError, ParameterError, emit

DEFAULT_BINS_PER_DECADE = 10
DEFAULT_GRID_POINTS = 30
TAIL_EPSILON = 0.05
MIN_TAIL_SAMPLES = 100
TAIL_EVIDENCE_QUANTILE = 0.99
GROWTH_SPAN = (0.2, 0.9)


def log(msg: str) -> None:
    emit("analytics", msg)


@dataclass(frozen=True)
class CurvePoints:
    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float).ravel()
        y = np.asarray(self.y, dtype=float).ravel()
        if x.size != y.size:
            raise DataError(f"curve has {x.size} x values but {y.size} y values")
        if x.size > 1 and np.any(np.diff(x) <= 0):
            raise DataError("curve x values must be strictly increasing")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise DataError("curve values must be finite")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @classmethod
    def from_pairs(cls, pairs: Iterable[Tuple[float, float]]) -> "CurvePoints":
        pairs = list(pairs)
        if not pairs:
            return cls(np.empty(0), np.empty(0))
        xs, ys = zip(*pairs)
        return cls(np.array(xs), np.array(ys))

    @property
    def points(self) -> List[Tuple[float, float]]:
        return list(zip(self.x.tolist(), self.y.tolist()))

    def __len__(self) -> int:
        return int(self.x.size)

    def between(self, lo: float, hi: float) -> "CurvePoints":
        keep = (self.x >= lo) & (self.x <= hi)
        return CurvePoints(self.x[keep], self.y[keep])


@dataclass(frozen=True)
class RegressionFit:
    slope: float
    intercept: float
    stderr_slope: float
    r2: float
    n: int

    def __post_init__(self):
        if self.n < 3:
            raise DataError(f"a regression needs at least 3 points, got {self.n}")

    def rows(self, prefix: str = "") -> List[Tuple[str, float]]:
        return [
            (f"{prefix}slope", self.slope),
            (f"{prefix}stderr_slope", self.stderr_slope),
            (f"{prefix}intercept", self.intercept),
            (f"{prefix}r2", self.r2),
            (f"{prefix}n", self.n),
        ]


@dataclass
class TailVerdict:
    verdict: str  # "heavy" | "light" | "exponential"
    weibull: WeibullLaw
    fit: FitResult
    semilog: RegressionFit
    above_exponential: float  # log(empirical CCDF / exponential CCDF) at the upper quantile
    offset: float


@dataclass
class GrowthCurves:
    n_of_t: CurvePoints
    dn_dt: CurvePoints


@dataclass
class GrowthSlopes:
    fit_n: RegressionFit
    fit_dndt: RegressionFit

    @property
    def difference(self) -> float:
        return self.fit_n.slope - self.fit_dndt.slope


def _samples(samples, what: str) -> np.ndarray:
    x = np.asarray(samples, dtype=float).ravel()
    if x.size == 0:
        raise DataError(f"{what}: no samples")
    if not np.all(np.isfinite(x)):
        raise DataError(f"{what}: non-finite samples")
    return x


# ---------------------------------------------------------------------------
# Distribution curves
# ---------------------------------------------------------------------------

def ccdf(samples) -> CurvePoints:
    """At each distinct value v: fraction of samples strictly greater than v."""
    x = _samples(samples, "ccdf")
    values, counts = np.unique(x, return_counts=True)
    above = x.size - np.cumsum(counts)
    return CurvePoints(values, above / x.size)


def log_binned_density(samples, bins_per_decade: int = DEFAULT_BINS_PER_DECADE, min_count: int = 1) -> CurvePoints:
    x = _samples(samples, "log_binned_density")
    if bins_per_decade < 1:
        raise ParameterError(f"bins_per_decade must be >= 1, got {bins_per_decade}")
    bad = int(np.count_nonzero(x <= 0))
    if bad:
        raise DataError(f"log_binned_density: {bad} non-positive samples")

    lo = math.floor(math.log10(x.min()) * bins_per_decade) / bins_per_decade
    hi = math.ceil(math.log10(x.max()) * bins_per_decade) / bins_per_decade
    if hi <= lo:
        hi = lo + 1.0 / bins_per_decade
    n_bins = int(round((hi - lo) * bins_per_decade))
    edges = 10.0 ** np.linspace(lo, hi, n_bins + 1)
    edges[0] = min(edges[0], x.min())
    edges[-1] = max(edges[-1], x.max())

    counts, _ = np.histogram(x, bins=edges)
    widths = np.diff(edges)
    keep = counts >= max(1, min_count)
    centres = np.sqrt(edges[:-1] * edges[1:])
    return CurvePoints(centres[keep], counts[keep] / (x.size * widths[keep]))


def _ols(u: np.ndarray, v: np.ndarray) -> RegressionFit:
    if u.size < 3:
        raise DataError(f"a regression needs at least 3 points, got {u.size}")
    if np.ptp(u) == 0:
        raise DataError("a regression needs at least two distinct x values")
    res = stats.linregress(u, v)
    r2 = float(res.rvalue) ** 2 if math.isfinite(res.rvalue) else 0.0
    return RegressionFit(
        slope=float(res.slope),
        intercept=float(res.intercept),
        stderr_slope=float(res.stderr),
        r2=min(1.0, r2),
        n=int(u.size),
    )


def loglog_regression(curve: CurvePoints) -> RegressionFit:
    """OLS of log y on log x."""
    if len(curve) < 3:
        raise DataError(f"loglog_regression: need at least 3 points, got {len(curve)}")
    if np.any(curve.x <= 0) or np.any(curve.y <= 0):
        raise DataError("loglog_regression: coordinates must be positive")
    return _ols(np.log(curve.x), np.log(curve.y))


def ks_distance(samples, cdf: Callable, discrete: bool = False) -> float:
    """
    sup_x |F_emp(x) - cdf(x)|. With discrete=True the samples are integers
    obtained by rounding a continuous variable X, so P(N <= k) is compared
    with cdf(k + 1/2).
    """
    x = _samples(samples, "ks_distance")
    if not discrete:
        return float(stats.kstest(x, cdf).statistic)
    values, counts = np.unique(x, return_counts=True)
    emp = np.cumsum(counts) / x.size
    before = np.concatenate([[0.0], emp[:-1]])
    at = np.abs(emp - np.asarray(cdf(values + 0.5), dtype=float))
    below = np.abs(before - np.asarray(cdf(values - 0.5), dtype=float))
    return float(max(at.max(), below.max()))


def tail_classify(samples, epsilon: float = TAIL_EPSILON) -> TailVerdict:
    """
    Weibull MLE on the excesses over the sample minimum. Shape below 1 - eps
    is heavy, above 1 + eps light, in between exponential. The CCDF of the
    excesses is also compared with the exponential of the same mean.
    """
    x = _samples(samples, "tail_classify")
    if x.size < MIN_TAIL_SAMPLES:
        raise DataError(f"tail_classify: need at least {MIN_TAIL_SAMPLES} samples, got {x.size}")
    offset = float(x.min())
    excess = x - offset
    excess = excess[excess > 0]
    if excess.size < MIN_TAIL_SAMPLES // 2:
        raise DataError(f"tail_classify: only {excess.size} samples above the minimum")

    fit = weibull_mle(excess)
    shape = fit.params["shape"]
    if shape < 1.0 - epsilon:
        verdict = "heavy"
    elif shape > 1.0 + epsilon:
        verdict = "light"
    else:
        verdict = "exponential"

    curve = ccdf(excess)
    keep = curve.y > 0
    semilog = _ols(curve.x[keep], np.log(curve.y[keep]))

    q = float(np.quantile(excess, TAIL_EVIDENCE_QUANTILE))
    emp_tail = float(np.count_nonzero(excess > q)) / excess.size
    above = math.log(max(emp_tail, 1.0 / excess.size)) + q / float(excess.mean())

    return TailVerdict(
        verdict=verdict,
        weibull=WeibullLaw(shape, fit.params["scale"]),
        fit=fit,
        semilog=semilog,
        above_exponential=above,
        offset=offset,
    )


def weibull_plot(samples) -> CurvePoints:
    """(ln x, ln(-ln(1 - F))) with median ranks; a straight line of slope = shape for Weibull data."""
    x = _samples(samples, "weibull_plot")
    x = np.sort(x[x > 0])
    if x.size < 2:
        raise DataError("weibull_plot: need at least 2 positive samples")
    n = x.size
    ranks = (np.arange(1, n + 1) - 0.3) / (n + 0.4)
    values, last = np.unique(x[::-1], return_index=True)
    last = n - 1 - last  # highest rank per distinct value
    return CurvePoints(np.log(values), np.log(-np.log1p(-ranks[last])))


def qq_points(a, b, n_quantiles: int = 100) -> Tuple[np.ndarray, np.ndarray]:
    xa = _samples(a, "qq_points")
    xb = _samples(b, "qq_points")
    probs = (np.arange(n_quantiles) + 0.5) / n_quantiles
    return np.quantile(xa, probs), np.quantile(xb, probs)


def trim_upper(samples, quantile: float) -> np.ndarray:
    """Drop samples above the given quantile (extreme, promoted topics)."""
    if not 0 < quantile <= 1:
        raise ParameterError(f"trim quantile must be in (0, 1], got {quantile}")
    x = _samples(samples, "trim_upper")
    cut = float(np.quantile(x, quantile))
    kept = x[x <= cut]
    if kept.size < x.size:
        log(f"trimmed {x.size - kept.size} samples above {cut:g}")
    return kept


# ---------------------------------------------------------------------------
# Growth curves
# ---------------------------------------------------------------------------

def _as_threads(threads: Union[Thread, Sequence[Thread]]) -> List[Thread]:
    if isinstance(threads, Thread):
        return [threads]
    return list(threads)


def growth_curves(
    threads: Union[Thread, Sequence[Thread]],
    n_grid: int = DEFAULT_GRID_POINTS,
    span: Tuple[float, float] = (0.0, 1.0),
) -> GrowthCurves:
    """
    N(t) is the mean cumulative count over threads still exposed at t.
    dN/dt is the pooled count in each grid cell over the pooled exposed time
    in that cell. The geometric grid spans the given quantiles of the pooled
    comment times.
    """
    threads = _as_threads(threads)
    per_thread = [np.sort(t.comment_times()) for t in threads]
    pooled = np.concatenate(per_thread) if per_thread else np.empty(0)
    pooled = pooled[pooled > 0]
    if pooled.size < 2:
        raise DataError(f"growth_curves: need at least 2 comments with t > 0, got {pooled.size}")
    if n_grid < 2:
        raise ParameterError(f"n_grid must be >= 2, got {n_grid}")

    lo, hi = np.quantile(pooled, span)
    lo = max(float(lo), float(pooled.min()))
    if not hi > lo:
        raise DataError("growth_curves: comment times do not span a grid")
    edges = np.geomspace(lo, float(hi), n_grid + 1)

    total = np.zeros(edges.size)
    exposed = np.zeros(edges.size)
    cell_counts = np.zeros(n_grid)
    cell_time = np.zeros(n_grid)
    for thread, times in zip(threads, per_thread):
        alive = thread.T >= edges
        cum = np.searchsorted(times, edges, side="right")
        total += np.where(alive, cum, 0)
        exposed += alive
        cell_counts += np.diff(cum)
        cell_time += np.clip(thread.T - edges[:-1], 0.0, np.diff(edges))

    keep_n = (exposed > 0) & (total > 0)
    n_of_t = CurvePoints(edges[keep_n], total[keep_n] / exposed[keep_n])

    mids = np.sqrt(edges[:-1] * edges[1:])
    keep_d = (cell_counts > 0) & (cell_time > 0)
    dn_dt = CurvePoints(mids[keep_d], cell_counts[keep_d] / cell_time[keep_d])
    return GrowthCurves(n_of_t=n_of_t, dn_dt=dn_dt)


def growth_slopes(
    threads: Union[Thread, Sequence[Thread]],
    n_grid: int = DEFAULT_GRID_POINTS,
    span: Tuple[float, float] = GROWTH_SPAN,
) -> GrowthSlopes:
    curves = growth_curves(threads, n_grid, span)
    slopes = GrowthSlopes(loglog_regression(curves.n_of_t), loglog_regression(curves.dn_dt))
    log(
        f"growth: slope N {slopes.fit_n.slope:.4f}, slope dN/dt {slopes.fit_dndt.slope:.4f}, "
        f"difference {slopes.difference:.4f}"
    )
    return slopes


# ---------------------------------------------------------------------------
# In-degrees
# ---------------------------------------------------------------------------

def indegree_ccdf(hist: Dict[int, int]) -> CurvePoints:
    """(k, P(K >= k)) for every observed k."""
    if not hist:
        raise DataError("indegree_ccdf: empty histogram")
    ks = np.array(sorted(hist), dtype=float)
    counts = np.array([hist[int(k)] for k in ks], dtype=float)
    at_least = counts[::-1].cumsum()[::-1]
    return CurvePoints(ks, at_least / counts.sum())


def estimate_delta0(hist: Dict[int, int]) -> float:
    """Invert the zero-degree share p0 = (1 + delta0) / (1 + 2 delta0)."""
    total = sum(hist.values())
    if total == 0:
        raise DataError("estimate_delta0: empty histogram")
    p0 = hist.get(0, 0) / total
    if not 0.5 < p0 < 1.0:
        raise EstimationError("zero-degree share outside (1/2, 1)", {"p0": p0, "n": total})
    return (1.0 - p0) / (2.0 * p0 - 1.0)


def indegree_tail_fit(
    hist: Dict[int, int], delta0: Optional[float] = None, k_min: int = 1, min_count: int = 50
) -> RegressionFit:
    """
    Slope of log P(K >= k) against log(k + 1.5 delta0); the discrete
    attachment law is a pure power law of exponent -(1 + delta0) in that
    variable up to second order.
    """
    if delta0 is None:
        delta0 = estimate_delta0(hist)
    total = sum(hist.values())
    curve = indegree_ccdf(hist)
    keep = (curve.x >= k_min) & (curve.y * total >= min_count)
    ks, ys = curve.x[keep], curve.y[keep]
    if ks.size < 3:
        raise DataError("indegree_tail_fit: fewer than 3 degrees with enough support")
    # log-spaced degrees so the sparse tail does not outweigh the body
    grid = np.unique(np.round(np.geomspace(ks[0], ks[-1], DEFAULT_BINS_PER_DECADE * 4)))
    pick = np.unique(np.searchsorted(ks, grid).clip(0, ks.size - 1))
    if pick.size < 3:
        pick = np.arange(ks.size)
    return _ols(np.log(ks[pick] + 1.5 * delta0), np.log(ys[pick]))


# ---------------------------------------------------------------------------
# CSV output
# ---------------------------------------------------------------------------

def write_table_csv(path: Path, columns: Sequence[str], rows: Iterable[Sequence], header_comment: str = "") -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as f:
        if header_comment:
            f.write(f"# {header_comment}\n")
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_cell(v) for v in row])


def _cell(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, np.integer):
        return int(v)
    return v


def write_curve_csv(path: Path, curve: CurvePoints, header_comment: str = "") -> None:
    write_table_csv(path, ("x", "y"), curve.points, header_comment)


def write_pairs_csv(path: Path, rows: Iterable[Tuple[str, object]], header_comment: str = "") -> None:
    write_table_csv(path, ("name", "value"), rows, header_comment)

#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
distributions.py

Probability laws used by the thread model:

  TruncatedPareto  waiting time between two comments of one user
  ExponentialLaw   exposure duration (fast-turnover front-page columns)
  ParetoLaw        exposure duration (slow-turnover listings)
  WeibullLaw       conversation size under exponential exposure

Densities, CDFs, inverse-transform samplers and maximum-likelihood
estimators. Everything that draws random numbers takes an explicit
numpy Generator; nothing in here holds state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Optional, Union

import numpy as np
from scipy import optimize

from errors import DataError, EstimationError, ParameterError, emit

BISECTION_BRACKET = (0.01, 20.0)
BISECTION_XTOL = 1e-8
WEIBULL_MAX_ITER = 200
WEIBULL_TOL = 1e-10
MIN_TP_SAMPLES = 10
MIN_WEIBULL_SAMPLES = 10
MIN_EXPOSURE_SAMPLES = 30


def log(msg: str) -> None:
    emit("distributions", msg)


def _finite_positive(*values: float) -> bool:
    return all(math.isfinite(v) and v > 0 for v in values)


def _result(x_in, out):
    # scalars in, scalars out
    if np.ndim(x_in) == 0:
        return float(out)
    return out


# ---------------------------------------------------------------------------
# Laws
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TruncatedPareto:
    """Upper-truncated Pareto on [a, b]: f(x) = c / (a^-c - b^-c) * x^(-c-1)."""

    a: float
    b: float
    c: float

    def __post_init__(self):
        if not _finite_positive(self.a, self.b, self.c) or not self.a < self.b:
            raise ParameterError(
                f"truncated Pareto needs 0 < a < b and c > 0, got a={self.a}, b={self.b}, c={self.c}"
            )

    def pdf(self, x):
        return tp_pdf(self, x)

    def cdf(self, x):
        return tp_cdf(self, x)

    @property
    def mean(self) -> float:
        return tp_mean(self)


@dataclass(frozen=True)
class ExponentialLaw:
    rate: float

    def __post_init__(self):
        if not _finite_positive(self.rate):
            raise ParameterError(f"exponential rate must be > 0, got {self.rate}")

    def cdf(self, x):
        xa = np.asarray(x, dtype=float)
        out = np.where(xa > 0, -np.expm1(-self.rate * np.maximum(xa, 0.0)), 0.0)
        return _result(x, out)

    @property
    def mean(self) -> float:
        return 1.0 / self.rate


@dataclass(frozen=True)
class ParetoLaw:
    """P(T < x) = 1 - (x / t_min)^-alpha for x >= t_min."""

    t_min: float
    alpha: float

    def __post_init__(self):
        if not _finite_positive(self.t_min, self.alpha):
            raise ParameterError(
                f"Pareto law needs t_min > 0 and alpha > 0, got t_min={self.t_min}, alpha={self.alpha}"
            )

    def cdf(self, x):
        xa = np.asarray(x, dtype=float)
        safe = np.maximum(xa, self.t_min)
        out = np.where(xa > self.t_min, -np.expm1(-self.alpha * np.log(safe / self.t_min)), 0.0)
        return _result(x, out)


@dataclass(frozen=True)
class WeibullLaw:
    shape: float
    scale: float

    def __post_init__(self):
        if not _finite_positive(self.shape, self.scale):
            raise ParameterError(
                f"Weibull law needs shape > 0 and scale > 0, got shape={self.shape}, scale={self.scale}"
            )

    def pdf(self, x):
        return weibull_pdf(self, x)

    def cdf(self, x):
        return weibull_cdf(self, x)


ExposureLaw = Union[ExponentialLaw, ParetoLaw]


@dataclass
class FitResult:
    family: str
    params: Dict[str, float]
    stderr: Dict[str, float]
    loglik: float
    n: int

    def __post_init__(self):
        if self.n < 2:
            raise DataError(f"a fit needs at least 2 samples, got {self.n}")
        if any(not (v >= 0) for v in self.stderr.values()):
            raise EstimationError("negative or undefined standard error", {"stderr": self.stderr})

    def rows(self):
        """(name, value) pairs in a stable order, for CSV output."""
        out = [("family", self.family), ("n", self.n), ("loglik", self.loglik)]
        for name, value in self.params.items():
            out.append((name, value))
            out.append((f"{name}_stderr", self.stderr.get(name, float("nan"))))
        return out


@dataclass
class ExposureFit:
    family: str
    fit: FitResult
    loglik_gap: float
    law: ExposureLaw
    candidates: Dict[str, FitResult] = field(default_factory=dict)


def _samples(samples, what: str) -> np.ndarray:
    x = np.asarray(samples, dtype=float).ravel()
    if x.size == 0:
        raise DataError(f"{what}: no samples")
    if not np.all(np.isfinite(x)):
        raise DataError(f"{what}: non-finite samples")
    return x


def _positive_samples(samples, what: str, minimum: int) -> np.ndarray:
    x = _samples(samples, what)
    if x.size < minimum:
        raise DataError(f"{what}: need at least {minimum} samples, got {x.size}")
    bad = int(np.count_nonzero(x <= 0))
    if bad:
        raise DataError(f"{what}: {bad} non-positive samples")
    return x


# ---------------------------------------------------------------------------
# Truncated Pareto
# ---------------------------------------------------------------------------

def _tp_norm(d: TruncatedPareto) -> float:
    # 1 - (a/b)^c, computed without cancellation
    return -math.expm1(d.c * math.log(d.a / d.b))


def tp_pdf(d: TruncatedPareto, x):
    if not isinstance(d, TruncatedPareto):
        raise ParameterError("tp_pdf needs a TruncatedPareto law")
    xa = np.asarray(x, dtype=float)
    inside = (xa >= d.a) & (xa <= d.b)
    safe = np.where(inside, xa, d.a)
    out = np.where(inside, (d.c / d.a) * (safe / d.a) ** (-d.c - 1.0) / _tp_norm(d), 0.0)
    return _result(x, out)


def tp_cdf(d: TruncatedPareto, x):
    if not isinstance(d, TruncatedPareto):
        raise ParameterError("tp_cdf needs a TruncatedPareto law")
    xa = np.asarray(x, dtype=float)
    safe = np.clip(xa, d.a, d.b)
    body = -np.expm1(d.c * np.log(d.a / safe)) / _tp_norm(d)
    out = np.where(xa <= d.a, 0.0, np.where(xa >= d.b, 1.0, body))
    return _result(x, out)


def tp_ppf(d: TruncatedPareto, u):
    """Inverse of tp_cdf; u in [0, 1]."""
    ua = np.clip(np.asarray(u, dtype=float), 0.0, 1.0)
    out = d.a * (1.0 - ua * _tp_norm(d)) ** (-1.0 / d.c)
    out = np.clip(out, d.a, d.b)
    return _result(u, out)


def tp_mean(d: TruncatedPareto) -> float:
    if not isinstance(d, TruncatedPareto):
        raise ParameterError("tp_mean needs a TruncatedPareto law")
    log_rho = math.log(d.a / d.b)
    if abs(d.c - 1.0) < 1e-12:
        # c = 1 limit of c/(c-1) * (a^(1-c) - b^(1-c)) / (a^-c - b^-c)
        return d.a * (-log_rho) / -math.expm1(log_rho)
    ratio = math.expm1((d.c - 1.0) * log_rho) / math.expm1(d.c * log_rho)
    return d.c / (d.c - 1.0) * d.a * ratio


def tp_sample(d: TruncatedPareto, rng: np.random.Generator, size=None):
    u = rng.random(size)
    return tp_ppf(d, u)


def tp_loglik(samples, a: float, b: float, c: float) -> float:
    x = np.asarray(samples, dtype=float)
    n = x.size
    return (
        n * math.log(c)
        + n * c * math.log(a)
        - n * math.log1p(-math.exp(c * math.log(a / b)))
        - (c + 1.0) * float(np.log(x).sum())
    )


def tp_mle(samples, a: float, b: Optional[float] = None) -> FitResult:
    """
    MLE of the tail exponent c with both bounds fixed by the caller.
    b=None takes the largest observation as the upper bound.
    """
    x = _positive_samples(samples, "tp_mle", MIN_TP_SAMPLES)
    if np.ptp(x) == 0:
        raise EstimationError(
            "degenerate likelihood: all samples are equal", {"value": float(x[0]), "n": int(x.size)}
        )
    if b is None:
        b = float(x.max())
    if not (_finite_positive(a, b) and a < b):
        raise ParameterError(f"tp_mle needs 0 < a < b, got a={a}, b={b}")
    outside = int(np.count_nonzero((x < a) | (x > b)))
    if outside:
        raise DataError(f"tp_mle: {outside} samples outside [{a}, {b}]")

    n = x.size
    sum_log = float(np.log(x).sum())
    la, lb = math.log(a), math.log(b)
    span = la - lb

    def score(c: float) -> float:
        r = math.exp(c * span)
        return n / c + n * (la - r * lb) / (1.0 - r) - sum_log

    lo, hi = BISECTION_BRACKET
    f_lo, f_hi = score(lo), score(hi)
    if f_lo * f_hi > 0:
        raise EstimationError(
            "score has no sign change on the bisection bracket",
            {"bracket": (lo, hi), "score_lo": f_lo, "score_hi": f_hi, "n": n},
        )
    c_hat = optimize.bisect(score, lo, hi, xtol=BISECTION_XTOL)

    r = math.exp(c_hat * span)
    info = n / c_hat ** 2 - n * r * span ** 2 / (1.0 - r) ** 2
    stderr = 1.0 / math.sqrt(info) if info > 0 else float("inf")
    return FitResult(
        family="truncated_pareto",
        params={"c": c_hat, "a": float(a), "b": float(b)},
        stderr={"c": stderr, "a": 0.0, "b": 0.0},
        loglik=tp_loglik(x, a, b, c_hat),
        n=n,
    )


# ---------------------------------------------------------------------------
# Weibull
# ---------------------------------------------------------------------------

def weibull_cdf(law: WeibullLaw, x):
    xa = np.asarray(x, dtype=float)
    z = np.maximum(xa, 0.0) / law.scale
    out = np.where(xa > 0, -np.expm1(-(z ** law.shape)), 0.0)
    return _result(x, out)


def weibull_pdf(law: WeibullLaw, x):
    xa = np.asarray(x, dtype=float)
    pos = xa > 0
    z = np.where(pos, xa, law.scale) / law.scale
    body = (law.shape / law.scale) * z ** (law.shape - 1.0) * np.exp(-(z ** law.shape))
    return _result(x, np.where(pos, body, 0.0))


def weibull_sample(law: WeibullLaw, rng: np.random.Generator, size=None):
    out = law.scale * rng.weibull(law.shape, size)
    return float(out) if size is None else out


def weibull_mle(samples) -> FitResult:
    """
    Two-parameter Weibull MLE. Newton iteration on the profile-likelihood
    shape equation
        sum(x^k ln x) / sum(x^k) - mean(ln x) - 1/k = 0,
    then scale = mean(x^k)^(1/k).
    """
    x = _positive_samples(samples, "weibull_mle", MIN_WEIBULL_SAMPLES)
    if np.ptp(x) == 0:
        raise EstimationError("degenerate likelihood: all samples are equal", {"value": float(x[0])})

    n = x.size
    ln_x = np.log(x)
    centre = float(ln_x.mean())
    ln_y = ln_x - centre  # samples rescaled by their geometric mean
    top = float(ln_y.max())

    k = 1.0
    converged = False
    for iteration in range(1, WEIBULL_MAX_ITER + 1):
        w = np.exp(k * (ln_y - top))
        s0 = float(w.sum())
        s1 = float((w * ln_y).sum())
        s2 = float((w * ln_y * ln_y).sum())
        f = s1 / s0 - 1.0 / k
        f_prime = s2 / s0 - (s1 / s0) ** 2 + 1.0 / (k * k)
        if not (math.isfinite(f) and math.isfinite(f_prime)) or f_prime <= 0:
            raise EstimationError(
                "Weibull shape iteration broke down", {"iteration": iteration, "k": k, "f": f}
            )
        k_next = k - f / f_prime
        if k_next <= 0:
            k_next = k / 2.0
        if abs(k_next - k) < WEIBULL_TOL * max(1.0, k):
            k = k_next
            converged = True
            break
        k = k_next
    if not converged:
        raise EstimationError(
            "Weibull shape iteration did not converge", {"iterations": WEIBULL_MAX_ITER, "k": k}
        )

    w = np.exp(k * (ln_y - top))
    ln_scale = centre + (math.log(float(w.mean())) + k * top) / k
    scale = math.exp(ln_scale)

    ln_z = ln_x - ln_scale
    zk = np.exp(k * ln_z)
    sum_zk = float(zk.sum())
    h_kk = -n / k ** 2 - float((zk * ln_z * ln_z).sum())
    h_ll = (n * k - k * (k + 1.0) * sum_zk) / scale ** 2
    h_kl = (-n + float((zk * (1.0 + k * ln_z)).sum())) / scale
    info = -np.array([[h_kk, h_kl], [h_kl, h_ll]])
    try:
        cov = np.linalg.inv(info)
    except np.linalg.LinAlgError as e:
        raise EstimationError("singular Weibull information matrix", {"k": k, "scale": scale}) from e
    var = np.clip(np.diag(cov), 0.0, None)

    loglik = n * math.log(k) - n * k * ln_scale + (k - 1.0) * float(ln_x.sum()) - sum_zk
    return FitResult(
        family="weibull",
        params={"shape": k, "scale": scale},
        stderr={"shape": float(math.sqrt(var[0])), "scale": float(math.sqrt(var[1]))},
        loglik=loglik,
        n=n,
    )


# ---------------------------------------------------------------------------
# Exposure durations
# ---------------------------------------------------------------------------

def exposure_sample(spec: ExposureLaw, rng: np.random.Generator, size=None):
    if isinstance(spec, ExponentialLaw):
        out = rng.exponential(1.0 / spec.rate, size)
    elif isinstance(spec, ParetoLaw):
        # numpy draws Lomax; shift by one for the classical Pareto
        out = spec.t_min * (1.0 + rng.pareto(spec.alpha, size))
    else:
        raise ParameterError(f"unknown exposure law: {spec!r}")
    return float(out) if size is None else out


def exponential_mle(samples) -> FitResult:
    x = _positive_samples(samples, "exponential_mle", 2)
    n = x.size
    rate = 1.0 / float(x.mean())
    return FitResult(
        family="exponential",
        params={"rate": rate},
        stderr={"rate": rate / math.sqrt(n)},
        loglik=n * math.log(rate) - n,
        n=n,
    )


def pareto_mle(samples, t_min: Optional[float] = None) -> FitResult:
    x = _positive_samples(samples, "pareto_mle", 2)
    if t_min is None:
        t_min = float(x.min())
    if not _finite_positive(t_min):
        raise ParameterError(f"pareto_mle needs t_min > 0, got {t_min}")
    if np.any(x < t_min):
        raise DataError(f"pareto_mle: samples below t_min={t_min}")
    n = x.size
    spread = float(np.log(x / t_min).sum())
    if spread <= 0:
        raise EstimationError("degenerate likelihood: all samples equal t_min", {"t_min": t_min, "n": n})
    alpha = n / spread
    loglik = n * math.log(alpha) + n * alpha * math.log(t_min) - (alpha + 1.0) * float(np.log(x).sum())
    return FitResult(
        family="pareto",
        params={"alpha": alpha, "t_min": t_min},
        stderr={"alpha": alpha / math.sqrt(n), "t_min": 0.0},
        loglik=loglik,
        n=n,
    )


def fit_exposure(samples) -> ExposureFit:
    """Fit both exposure families and keep the one with the higher log-likelihood."""
    x = _positive_samples(samples, "fit_exposure", MIN_EXPOSURE_SAMPLES)
    if np.ptp(x) == 0:
        raise EstimationError("degenerate likelihood: constant exposure durations", {"value": float(x[0])})

    exp_fit = exponential_mle(x)
    par_fit = pareto_mle(x)
    gap = abs(exp_fit.loglik - par_fit.loglik)
    if exp_fit.loglik >= par_fit.loglik:
        chosen = ExposureFit("exponential", exp_fit, gap, ExponentialLaw(exp_fit.params["rate"]))
    else:
        chosen = ExposureFit(
            "pareto", par_fit, gap, ParetoLaw(par_fit.params["t_min"], par_fit.params["alpha"])
        )
    chosen.candidates = {"exponential": exp_fit, "pareto": par_fit}
    log(f"exposure family: {chosen.family} (log-likelihood gap {gap:.3f}, n={x.size})")
    return chosen

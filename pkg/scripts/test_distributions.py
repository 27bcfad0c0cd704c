#!/usr/bin/env python3
# -*- coding: utf-8 -*-
import math

import numpy as np
import pytest
from scipy import integrate

from distributions import (
    ExponentialLaw,
    ParetoLaw,
    TruncatedPareto,
    WeibullLaw,
    exponential_mle,
    exposure_sample,
    fit_exposure,
    pareto_mle,
    tp_cdf,
    tp_mean,
    tp_mle,
    tp_pdf,
    tp_ppf,
    tp_sample,
    weibull_cdf,
    weibull_mle,
    weibull_pdf,
    weibull_sample,
)
from errors import DataError, EstimationError, ParameterError
from analytics import ks_distance

LAW = TruncatedPareto(1.0, 100.0, 1.5)


def rng(seed=0):
    return np.random.default_rng(seed)


# --- truncated Pareto -------------------------------------------------------

def test_tp_pdf_values():
    assert tp_pdf(LAW, 0.5) == 0.0
    assert tp_pdf(LAW, 1.0) == pytest.approx(1.5 / (1 - 100 ** -1.5))
    assert tp_pdf(TruncatedPareto(1.0, 2.0, 1.0), 1.5) == pytest.approx(0.8889, abs=1e-4)
    total, _ = integrate.quad(lambda x: tp_pdf(LAW, x), 1.0, 100.0, limit=200)
    assert total == pytest.approx(1.0, abs=1e-8)


def test_tp_cdf_values():
    assert tp_cdf(LAW, 1.0) == 0.0
    assert tp_cdf(LAW, 100.0) == 1.0
    assert tp_cdf(LAW, 1e9) == 1.0
    assert tp_cdf(TruncatedPareto(1.0, 4.0, 1.0), 2.0) == pytest.approx(2.0 / 3.0)
    x = np.array([1.5, 7.0, 42.0])
    assert np.allclose(tp_ppf(LAW, tp_cdf(LAW, x)), x)


def test_tp_ppf_endpoints():
    assert tp_ppf(LAW, 0.0) == pytest.approx(1.0)
    assert tp_ppf(LAW, 1.0) == pytest.approx(100.0)


def test_tp_mean():
    assert tp_mean(LAW) == pytest.approx(3 * (1 - 100 ** -0.5) / (1 - 100 ** -1.5), rel=1e-12)
    assert tp_mean(LAW) == pytest.approx(2.7027, abs=1e-4)
    assert tp_mean(TruncatedPareto(1.0, 10.0, 1.0)) == pytest.approx(math.log(10) / 0.9, rel=1e-12)
    # continuous through c = 1
    assert tp_mean(TruncatedPareto(1.0, 10.0, 1.0 + 1e-7)) == pytest.approx(2.5584, abs=1e-4)
    assert tp_mean(TruncatedPareto(2.0, 2.0 + 1e-9, 1.3)) == pytest.approx(2.0)
    numeric, _ = integrate.quad(lambda x: x * tp_pdf(LAW, x), 1.0, 100.0, limit=200)
    assert tp_mean(LAW) == pytest.approx(numeric, rel=1e-8)


def test_tp_rejects_bad_parameters():
    with pytest.raises(ParameterError):
        TruncatedPareto(2.0, 1.0, 1.5)
    with pytest.raises(ParameterError):
        TruncatedPareto(1.0, 10.0, 0.0)
    with pytest.raises(ParameterError):
        tp_pdf("not a law", 1.0)


def test_tp_sample_matches_cdf():
    x = tp_sample(LAW, rng(1), 50_000)
    assert x.min() >= 1.0 and x.max() <= 100.0
    assert ks_distance(x, LAW.cdf) < 0.01
    assert isinstance(tp_sample(LAW, rng(1)), float)


@pytest.mark.parametrize("c", [1.5670, 1.1262])
def test_tp_mle_recovers_exponent(c):
    x = tp_sample(TruncatedPareto(1.0, 1e4, c), rng(2), 10_000)
    fit = tp_mle(x, 1.0)
    assert fit.params["b"] == x.max()
    assert abs(fit.params["c"] - c) < 0.05
    assert 0 < fit.stderr["c"] < 0.05
    assert fit.n == 10_000


def test_tp_mle_errors():
    with pytest.raises(EstimationError) as err:
        tp_mle([1.0] * 20, 1.0, 10.0)
    assert "value" in err.value.diagnostics
    with pytest.raises(DataError):
        tp_mle([0.5] + [2.0, 3.0] * 10, 1.0, 10.0)
    with pytest.raises(DataError):
        tp_mle([2.0, 3.0], 1.0, 10.0)


def test_tp_cdf_is_monotone_on_a_fine_grid():
    law = TruncatedPareto(1.0, 1e4, 1.2)
    grid = np.concatenate([np.linspace(0.0, 1.0, 100, endpoint=False), np.geomspace(1.0, 2e4, 9_900)])
    F = tp_cdf(law, grid)
    assert np.all(np.diff(F) >= 0)
    assert F[0] == 0.0 and F[-1] == 1.0


def test_tp_mle_stderr_covers_truth():
    law = TruncatedPareto(1.0, 1e4, 1.5)
    g = rng(40)
    hits = 0
    for _ in range(50):
        fit = tp_mle(tp_sample(law, g, 10_000), 1.0, 1e4)
        hits += abs(fit.params["c"] - law.c) <= 3 * fit.stderr["c"]
    assert hits >= 45


# --- Weibull ----------------------------------------------------------------

def test_weibull_law_functions():
    law = WeibullLaw(1.5, 2.0)
    assert weibull_cdf(law, 0.0) == 0.0
    assert weibull_cdf(law, 2.0) == pytest.approx(1 - math.exp(-1))
    total, _ = integrate.quad(lambda x: weibull_pdf(law, x), 0, np.inf)
    assert total == pytest.approx(1.0, abs=1e-8)
    assert weibull_sample(law, rng(3), 10).shape == (10,)


def test_weibull_mle_recovers_parameters():
    x = weibull_sample(WeibullLaw(1.439, 10.834), rng(4), 100_000)
    fit = weibull_mle(x)
    assert 1.41 <= fit.params["shape"] <= 1.47
    assert 10.6 <= fit.params["scale"] <= 11.1
    assert fit.stderr["shape"] < 0.01


def test_weibull_mle_exponential_data():
    fit = weibull_mle(rng(5).exponential(1.0, 20_000))
    assert 0.97 <= fit.params["shape"] <= 1.03


def test_weibull_mle_errors():
    with pytest.raises(EstimationError):
        weibull_mle([3.0] * 50)
    with pytest.raises(DataError):
        weibull_mle([1.0, -2.0] + [3.0] * 20)


def test_weibull_mle_stderr_covers_truth():
    law = WeibullLaw(1.439, 10.834)
    g = rng(41)
    shape_hits = scale_hits = 0
    for _ in range(50):
        fit = weibull_mle(weibull_sample(law, g, 10_000))
        shape_hits += abs(fit.params["shape"] - law.shape) <= 3 * fit.stderr["shape"]
        scale_hits += abs(fit.params["scale"] - law.scale) <= 3 * fit.stderr["scale"]
    assert shape_hits >= 45
    assert scale_hits >= 45


# --- exposure ---------------------------------------------------------------

def test_exposure_sample_means_and_tail():
    x = exposure_sample(ExponentialLaw(0.01), rng(6), 100_000)
    assert abs(x.mean() - 100.0) < 2.0
    y = exposure_sample(ParetoLaw(1.0, 1.5), rng(7), 100_000)
    assert y.min() >= 1.0
    assert abs(pareto_mle(y, 1.0).params["alpha"] - 1.5) < 0.03


def test_exposure_mles():
    fit = exponential_mle(exposure_sample(ExponentialLaw(0.5), rng(8), 10_000))
    assert abs(fit.params["rate"] - 0.5) < 0.02
    assert fit.stderr["rate"] == pytest.approx(fit.params["rate"] / 100.0)
    with pytest.raises(DataError):
        pareto_mle([1.0, 2.0, 3.0], t_min=2.0)


def test_fit_exposure_selects_family():
    assert fit_exposure(exposure_sample(ExponentialLaw(0.01), rng(9), 10_000)).family == "exponential"
    choice = fit_exposure(exposure_sample(ParetoLaw(1.0, 1.2), rng(10), 10_000))
    assert choice.family == "pareto"
    assert isinstance(choice.law, ParetoLaw)
    assert choice.loglik_gap > 0
    assert set(choice.candidates) == {"exponential", "pareto"}


def test_fit_exposure_errors():
    with pytest.raises(EstimationError):
        fit_exposure([5.0] * 40)
    with pytest.raises(DataError):
        fit_exposure([])

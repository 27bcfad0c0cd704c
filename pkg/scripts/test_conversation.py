#!/usr/bin/env python3
# -*- coding: utf-8 -*-
import math

import numpy as np
import pytest
from scipy import stats

import conversation
from analytics import growth_slopes, indegree_ccdf, indegree_tail_fit, ks_distance
from conversation import (
    CommentEvent,
    Thread,
    TopicParams,
    attach_yule,
    exact_indegree_ccdf,
    grow_yule_tree,
    indegree_histogram,
    meanfield_indegree,
    predicted_indegree_cdf,
    predicted_size_cdf,
    predicted_size_pdf,
    simulate_site,
    simulate_size_analytic,
    simulate_thread_agent,
    simulate_thread_intensity,
    simulate_threads,
    size_law,
)
from distributions import ExponentialLaw, ParetoLaw, TruncatedPareto, WeibullLaw
from errors import ParameterError

WAITING = TruncatedPareto(0.01, 1e6, 1.2)


def agent_params(**kw):
    base = dict(gamma=0.01, c0=0.5, M=2000, exposure=ExponentialLaw(0.001), waiting=WAITING)
    base.update(kw)
    return TopicParams(**base)


def sizing(c_prime, gamma_prime, exposure):
    return TopicParams(
        gamma=gamma_prime, c0=c_prime, M=1, exposure=exposure, waiting=TruncatedPareto(1.0, 10.0, 1.0)
    )


def chain(n):
    thread = Thread.root_only(None, float(n))
    for i in range(1, n + 1):
        thread.events.append(CommentEvent(i, i - 1, float(i)))
    return thread


# --- parameters -------------------------------------------------------------

def test_topic_params_derived_values():
    p = agent_params()
    assert p.c == 1.2
    assert p.c_prime == pytest.approx(0.3)
    assert p.gamma_prime == pytest.approx(20.0)


def test_topic_params_reject_non_growing_regime():
    with pytest.raises(ParameterError, match="non-growing"):
        agent_params(waiting=TruncatedPareto(0.01, 1e6, 2.5), c0=0.0)
    with pytest.raises(ParameterError):
        agent_params(M=0)
    with pytest.raises(ParameterError):
        agent_params(delta0=0.0)


# --- agent simulator --------------------------------------------------------

def test_zero_interest_gives_root_only():
    thread = simulate_thread_agent(agent_params(gamma=0.0, M=1), np.random.default_rng(0))
    assert thread.size == 0
    assert thread.events == [CommentEvent(0, None, 0.0)]


def test_agent_thread_is_valid_tree_and_deterministic():
    p = agent_params()
    a = simulate_thread_agent(p, np.random.default_rng(11), T=500.0)
    b = simulate_thread_agent(p, np.random.default_rng(11), T=500.0)
    assert a.events == b.events
    assert a.size > 0
    a.validate()
    assert all(e.time <= 500.0 for e in a.events)


@pytest.mark.parametrize("user_age", conversation.USER_AGES)
@pytest.mark.parametrize("candidates", conversation.CANDIDATE_RULES)
def test_agent_switches(user_age, candidates):
    p = agent_params(M=50, waiting=TruncatedPareto(1.0, 1e3, 1.2), gamma=0.05)
    thread = simulate_thread_agent(p, np.random.default_rng(3), user_age=user_age, candidates=candidates, T=50.0)
    thread.validate()
    if user_age == "fresh":
        assert all(e.time >= 1.0 for e in thread.events[1:])


def test_agent_rejects_unknown_switch():
    with pytest.raises(ParameterError):
        simulate_thread_agent(agent_params(), np.random.default_rng(0), user_age="ancient")


def test_simulate_threads_independent_of_workers():
    p = agent_params()
    serial = simulate_threads(p, 6, base_seed=21)
    pooled = simulate_threads(p, 6, base_seed=21, workers=2)
    assert [t.events for t in serial] == [t.events for t in pooled]
    assert [t.topic_id for t in serial] == ["t00000", "t00001", "t00002", "t00003", "t00004", "t00005"]


def test_agent_growth_exponent():
    threads = simulate_threads(agent_params(), 200, base_seed=5)
    slopes = growth_slopes(threads)
    assert abs(slopes.fit_n.slope - 0.3) < 0.1
    assert abs(slopes.difference - 1.0) < 0.15


# --- analytic sizes ---------------------------------------------------------

def test_size_analytic_forced_exposure():
    assert simulate_size_analytic(sizing(1.0, 1.0, ExponentialLaw(1.0)), None, T=7.0) == 7
    assert simulate_size_analytic(sizing(0.5, 2.0, ExponentialLaw(1.0)), None, T=25.0) == 10
    assert simulate_size_analytic(sizing(0.5, 2.0, ExponentialLaw(1.0)), None, T=25.0, discrete=False) == 10.0


def test_size_analytic_matches_closed_form():
    p = sizing(0.5, 2.0, ExponentialLaw(0.001))
    n = simulate_size_analytic(p, np.random.default_rng(8), 20_000)
    assert ks_distance(n, lambda v: predicted_size_cdf(p, v), discrete=True) < 0.015


def test_predicted_size_cdf_exponential_case():
    p = sizing(1.0, 4.0, ExponentialLaw(0.1))
    assert predicted_size_cdf(p, 0.0) == 0.0
    for n in (1.0, 10.0, 100.0):
        assert predicted_size_cdf(p, n) == pytest.approx(1 - math.exp(-0.1 * n / 4.0))
    law = size_law(p)
    assert isinstance(law, WeibullLaw)
    assert law.shape == pytest.approx(1.0)
    assert law.scale == pytest.approx(40.0)


def test_predicted_size_pareto_case():
    p = sizing(0.5, 1.0, ParetoLaw(1.0, 1.5))
    assert predicted_size_cdf(p, 0.5) == 0.0
    law = size_law(p)
    assert isinstance(law, ParetoLaw)
    assert law.t_min == pytest.approx(1.0) and law.alpha == pytest.approx(3.0)
    n = np.array([100.0, 1000.0])
    slope = np.diff(np.log(predicted_size_pdf(p, n))) / np.diff(np.log(n))
    assert slope[0] == pytest.approx(-4.0, abs=1e-6)


def test_predicted_size_pdf_integrates_to_cdf():
    p = sizing(0.7, 3.0, ExponentialLaw(0.01))
    from scipy import integrate

    total, _ = integrate.quad(lambda v: predicted_size_pdf(p, v), 0.0, 50.0, limit=200)
    assert total == pytest.approx(predicted_size_cdf(p, 50.0), abs=1e-7)


# --- attachment -------------------------------------------------------------

def test_attach_to_root_only_thread():
    assert attach_yule(Thread.root_only(None, 1.0), 1.0, np.random.default_rng(0)) == 0


def test_attach_frequencies_follow_degree_plus_offset():
    thread = chain(1)  # root has one reply, node 1 has none
    rng = np.random.default_rng(1)
    picks = np.array([attach_yule(thread, 1.0, rng) for _ in range(100_000)])
    assert abs(np.mean(picks == 0) - 2.0 / 3.0) < 0.01


def test_attach_large_offset_is_uniform():
    thread = chain(9)
    rng = np.random.default_rng(2)
    picks = [attach_yule(thread, 1e6, rng) for _ in range(100_000)]
    counts = np.bincount(picks, minlength=10)
    assert stats.chisquare(counts).pvalue > 0.001


def test_indegree_histogram_examples():
    assert indegree_histogram([Thread.root_only(None, 1.0)]) == {0: 1}
    assert indegree_histogram(chain(2)) == {0: 1, 1: 2}
    assert indegree_histogram(chain(2), include_root=False) == {0: 1, 1: 1}


def test_predicted_indegree_cdf_values():
    assert predicted_indegree_cdf(1.0, 0.0) == 0.0
    assert predicted_indegree_cdf(1.0, 1.0) == pytest.approx(0.75)
    assert predicted_indegree_cdf(1.0, 1e9) == pytest.approx(1.0)
    with pytest.raises(ParameterError):
        predicted_indegree_cdf(0.0, 1.0)


def test_exact_indegree_law():
    assert exact_indegree_ccdf(1.0, 0) == pytest.approx(1.0)
    assert exact_indegree_ccdf(1.0, 1) == pytest.approx(1.0 / 3.0)
    k = np.arange(1, 200_001)
    assert exact_indegree_ccdf(1.0, k).sum() == pytest.approx(1.0, abs=1e-4)  # mean in-degree


def test_grown_tree_matches_exact_law_and_tail():
    tree = grow_yule_tree(100_000, 1.0, np.random.default_rng(4))
    tree.validate()
    hist = indegree_histogram(tree)
    curve = indegree_ccdf(hist)
    assert np.max(np.abs(curve.y - exact_indegree_ccdf(1.0, curve.x))) < 0.02
    assert abs(indegree_tail_fit(hist, delta0=1.0).slope + 2.0) < 0.1


def test_meanfield_indegree():
    assert meanfield_indegree(10.0, 10.0, 0.5, 1.0) == 0.0
    assert meanfield_indegree(1.0, 16.0, 1.0, 1.0) == pytest.approx(1.0 * (16.0 ** 0.5 - 1.0))
    with pytest.raises(ParameterError):
        meanfield_indegree(0.0, 10.0, 0.5, 1.0)


# --- intensity shortcut -----------------------------------------------------

def test_intensity_thread_mean_size():
    p = sizing(0.5, 2.0, ExponentialLaw(0.001))
    rng = np.random.default_rng(9)
    sizes = [simulate_thread_intensity(p, rng, T=400.0).size for _ in range(5000)]
    assert abs(np.mean(sizes) - 40.0) < 0.5


def test_intensity_threads_grow_like_agent_law():
    threads = simulate_threads(agent_params(), 300, base_seed=6, model="intensity")
    for thread in threads[:20]:
        thread.validate()
    slopes = growth_slopes(threads)
    assert abs(slopes.fit_n.slope - 0.3) < 0.05
    assert abs(slopes.difference - 1.0) < 0.1


def test_simulate_threads_rejects_unknown_model():
    with pytest.raises(ParameterError):
        simulate_threads(agent_params(), 2, base_seed=0, model="hawkes")


# --- site clock -------------------------------------------------------------

def site_params(**kw):
    base = dict(gamma=0.05, c0=0.8, M=12, exposure=ExponentialLaw(0.02), waiting=TruncatedPareto(1.0, 1e4, 1.5))
    base.update(kw)
    return TopicParams(**base)


def test_simulated_times_are_whole_seconds():
    p = agent_params(M=20, gamma=0.05)
    for thread in (
        simulate_thread_agent(p, np.random.default_rng(1), T=123.4567),
        simulate_thread_intensity(p, np.random.default_rng(1), T=123.4567),
    ):
        ticks = np.array([e.time for e in thread.events]) * 60
        assert np.allclose(ticks, np.rint(ticks), atol=1e-9)
        assert thread.T * 60 == pytest.approx(7407.0)
        thread.validate()


def test_simulate_threads_staggers_creation():
    threads = simulate_threads(agent_params(M=50), 3, base_seed=2, topic_interval=1.5)
    assert [t.created_at for t in threads] == [0.0, 90.0, 180.0]
    assert not any(t.users_shared for t in threads)
    with pytest.raises(ParameterError):
        simulate_threads(agent_params(M=50), 3, base_seed=2, topic_interval=-1.0)


def test_all_candidates_refused_when_too_many_events():
    assert conversation.expected_candidates(agent_params(), "next") == 2000
    assert conversation.expected_candidates(agent_params(), "all") > conversation.EVENT_LIMIT
    with pytest.raises(ParameterError, match="candidate events"):
        simulate_threads(agent_params(), 2, base_seed=0, candidates="all")


def test_site_keeps_one_trace_per_user():
    p = site_params()
    site = simulate_site(p, 60, base_seed=4)
    assert [t.created_at for t in site.threads[:3]] == [0.0, 60.0, 120.0]
    stamps = {}
    for thread in site.threads:
        thread.validate()
        assert thread.users_shared
        users = [e.user for e in thread.events[1:]]
        assert len(users) == len(set(users))  # next rule: one candidate per user and topic
        for e in thread.events[1:]:
            stamps.setdefault(e.user, []).append(int(round(thread.created_at + e.time * 60)))
    assert sum(t.size for t in site.threads) > 0
    for user, tick in site.activity():
        stamps.setdefault(user, []).append(tick)
    assert set(stamps) <= set(range(p.M))
    for ticks in stamps.values():
        ticks = np.sort(ticks)
        assert np.all(np.diff(ticks) >= 60)


def test_site_waiting_times_follow_the_waiting_law():
    from distributions import tp_mle

    p = site_params(M=40)
    site = simulate_site(p, 1000, base_seed=8)
    stamps = {}
    for thread in site.threads:
        for e in thread.events[1:]:
            stamps.setdefault(e.user, []).append(thread.created_at + e.time * 60)
    for user, tick in site.activity():
        stamps.setdefault(user, []).append(tick)
    gaps = np.concatenate([np.diff(np.sort(v)) for v in stamps.values()]) / 60
    fit = tp_mle(gaps, float(gaps.min()))
    assert gaps.size > 10000
    assert abs(fit.params["c"] - 1.5) < 0.05


def test_site_is_deterministic():
    a = simulate_site(site_params(), 30, base_seed=3, candidates="all")
    b = simulate_site(site_params(), 30, base_seed=3, candidates="all")
    assert [t.events for t in a.threads] == [t.events for t in b.threads]
    assert list(a.activity()) == list(b.activity())


def test_site_refuses_oversized_population():
    with pytest.raises(ParameterError, match="shared population"):
        simulate_site(agent_params(), 100, base_seed=0)
    with pytest.raises(ParameterError):
        simulate_site(site_params(), 0, base_seed=0)
    with pytest.raises(ParameterError):
        simulate_site(site_params(), 5, base_seed=0, candidates="some")

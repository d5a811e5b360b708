"""Passage times, coupled triples, and the estimator experiments."""

from __future__ import annotations

import math

import pytest

from outburst.engine import Budget
from outburst.env import EnvConfig, RadiusLaw
from outburst.errors import ConfigError
from outburst.geom import Ball, BallIndex
from outburst.passage import (
    CoverageTracker,
    DiffExperimentConfig,
    coupled_triple,
    diff_expectation,
    estimate_mu,
    passage_time,
    telescoping_identity,
    translation_samples,
)


def _env(seed=21, law=None, rate=1.0):
    return EnvConfig(dimension=2, rate=rate, seed=seed, law=law or RadiusLaw.dirac(1.0))


def test_passage_time_to_self_is_zero():
    res = passage_time(_env(), (0.0, 0.0), (0.0, 0.0))
    assert res.time == 0.0
    assert res.events == 0
    assert not res.censored


def test_passage_time_is_deterministic():
    a = passage_time(_env(seed=501), (0.0, 0.0), (3.0, 0.0))
    b = passage_time(_env(seed=501), (0.0, 0.0), (3.0, 0.0))
    assert a.time == b.time
    assert a.events == b.events
    assert a.time > 0.0
    c = passage_time(_env(seed=502), (0.0, 0.0), (3.0, 0.0))
    assert c.time != a.time


def test_passage_time_censored_by_budget():
    res = passage_time(_env(seed=77), (0.0, 0.0), (6.0, 0.0),
                       budget=Budget(max_events=3, max_time=100.0))
    assert res.censored
    assert math.isnan(res.time)
    assert res.bound == "max_events"


def test_triple_shares_one_environment():
    # T(x, y) measured inside the triple must equal the standalone passage
    # time in the same environment, float for float.
    env = _env(seed=611)
    tr = coupled_triple(env, (0.0, 0.0), (2.0, 0.0), (4.0, 0.0), probes=0)
    solo = passage_time(env, (0.0, 0.0), (4.0, 0.0))
    assert tr.t_xy == solo.time
    assert tr.probes == 0


def test_triple_slack_formula():
    env = _env(seed=612)
    delta = 1e-3
    tr = coupled_triple(env, (0.0, 0.0), (2.0, 0.0), (4.0, 0.0), delta=delta, probes=0)
    speed = 4.0 / tr.t_xy
    assert tr.slack == pytest.approx(10.0 * delta / speed, rel=1e-12)


def test_triples_satisfy_subadditivity():
    for rep in range(8):
        env = _env(seed=700 + rep)
        tr = coupled_triple(env, (0.0, 0.0), (1.5, 0.5), (3.5, 0.0), probes=50)
        assert not tr.censored
        assert not tr.violated
        assert tr.excess <= 0.0
        assert tr.probe_failures == 0
        # Both legs are real passage times of the same environment.
        assert tr.t_xz > 0.0 and tr.t_zy > 0.0


def test_triple_censoring_reports_nan():
    env = _env(seed=88)
    tr = coupled_triple(env, (0.0, 0.0), (4.0, 0.0), (8.0, 0.0),
                        budget=Budget(max_events=3, max_time=50.0), probes=10)
    assert tr.censored
    assert math.isnan(tr.t_xy)
    assert tr.probes == 0


def test_coverage_tracker_single_ball_is_exact():
    idx = BallIndex(2, 1.0)
    tracker = CoverageTracker(Ball((0.0, 0.0), 1.0), 1e-3, idx)
    assert not tracker.covered
    bid = idx.append((0.1, 0.0), 1.2, 0.4, 1)
    assert tracker.on_ball(bid, 0.4)
    assert tracker.covered
    assert tracker.cover_time == 0.4


def test_coverage_tracker_witness_miss_skips_refresh():
    idx = BallIndex(2, 1.0)
    tracker = CoverageTracker(Ball((0.0, 0.0), 1.0), 1e-3, idx)
    before = tracker.full_checks
    bid = idx.append((40.0, 40.0), 1.0, 0.1, 1)
    assert not tracker.on_ball(bid, 0.1)
    assert tracker.full_checks == before


def test_coverage_tracker_joint_cover_resolves_with_margin():
    # Jointly covered at the boundary may stay ambiguous at resolution
    # delta, but a ball with real margin settles it.
    idx = BallIndex(2, 1.0)
    tracker = CoverageTracker(Ball((0.0, 0.0), 1.0), 1e-3, idx)
    b1 = idx.append((-0.5, 0.0), 1.3, 1.0, 1)
    tracker.on_ball(b1, 1.0)
    assert not tracker.covered
    b2 = idx.append((0.5, 0.0), 1.3, 2.0, 1)
    tracker.on_ball(b2, 2.0)
    b3 = idx.append((0.0, 0.0), 1.01, 3.0, 1)
    tracker.on_ball(b3, 3.0)
    assert tracker.covered
    assert tracker.cover_time in (2.0, 3.0)


def test_estimate_mu_validation():
    env = _env()
    with pytest.raises(ConfigError):
        estimate_mu(env, [2.0], 30)
    with pytest.raises(ConfigError):
        estimate_mu(env, [4.0, 2.0], 30)
    with pytest.raises(ConfigError):
        estimate_mu(env, [2.0, 2.0], 30)
    with pytest.raises(ConfigError):
        estimate_mu(env, [2.0, -4.0], 30)
    with pytest.raises(ConfigError):
        estimate_mu(env, [2.0, 4.0], 10)


def test_estimate_mu_fields_and_consistency():
    env = _env(seed=314)
    est = estimate_mu(env, [2.0, 4.0], 30)
    assert est.distances == (2.0, 4.0)
    assert len(est.means) == 2
    assert est.counts == (30, 30)
    assert est.censored == (0, 0)
    assert est.mu_hat == env.rate * est.means[-1]
    assert est.mu_hat_se == env.rate * est.standard_errors[-1]
    for lo, m, hi in zip(est.ci_low, est.means, est.ci_high):
        assert lo < m < hi
    # Spread intervals cover the sample, so they bracket the mean interval.
    for slo, lo, hi, shi in zip(est.spread_low, est.ci_low, est.ci_high, est.spread_high):
        assert slo <= lo and hi <= shi
    # Normalized means shrink toward the limit as the distance grows, so
    # at short distances the plateau diagnostic is allowed to say no.
    assert est.means[1] < est.means[0]
    assert est.intervals_overlap() == (
        max(est.spread_low) <= min(est.spread_high)
    )


def test_telescoping_identity_is_algebraically_exact():
    env = _env(seed=2718)
    rep = telescoping_identity(env, n=2.0, segments=3, replications=30)
    assert len(rep.segment_estimates) == 3
    assert rep.max_relative_error <= 1e-12
    assert sum(rep.segment_estimates) == pytest.approx(rep.total_estimate, rel=1e-12)


def test_translation_samples_shapes():
    env = _env(seed=1618)
    sa, sb = translation_samples(env, n=2.0, m=3.0, replications=30)
    assert len(sa) == 30
    assert len(sb) == 30
    assert all(t > 0.0 for t in sa if not math.isnan(t))
    assert all(t > 0.0 for t in sb if not math.isnan(t))


def test_diff_expectation_report():
    env = _env(seed=999)
    cfg = DiffExperimentConfig(n=2.0, m_values=(2.0,), replications=30)
    res = diff_expectation(env, cfg)
    assert res.m_values == (2.0,)
    assert len(res.estimates) == 1
    assert res.counts[0] <= 30
    assert res.telescope.max_relative_error <= 1e-12
    # The shifted difference estimates E[T(n,-m)] - E[T(0,-m)], which is
    # nonnegative in expectation; with 30 coupled reps it should be well
    # above the negative of a few standard errors.
    assert res.estimates[0] > -3.0 * res.standard_errors[0]


def test_diff_config_validation():
    with pytest.raises(ConfigError):
        DiffExperimentConfig(n=0.0, m_values=(2.0,), replications=30)
    with pytest.raises(ConfigError):
        DiffExperimentConfig(n=2.0, m_values=(), replications=30)
    with pytest.raises(ConfigError):
        DiffExperimentConfig(n=2.0, m_values=(2.0,), replications=30, epsilon=1.0)
    with pytest.raises(ConfigError):
        DiffExperimentConfig(n=2.0, m_values=(2.0,), replications=30, telescope_segments=1)

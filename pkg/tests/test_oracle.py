"""Rejection-oracle behavior and engine cross-validation."""

from __future__ import annotations

import math

import pytest

from outburst.env import EnvConfig, RadiusLaw
from outburst.errors import ConfigError
from outburst.geom import Ball
from outburst.oracle import (
    CompareScenario,
    compare_with_engine,
    first_event_time,
    run_oracle,
)
from outburst.stats import ks_test


def _env(seed=42, rate=1.0, law=None):
    return EnvConfig(dimension=2, rate=rate, seed=seed, law=law or RadiusLaw.dirac(1.0))


def _unit_seed():
    return [(Ball((0.0, 0.0), 1.0), 1)]


def test_first_event_time_is_exponential():
    env = _env(seed=8101)
    rate_total = env.rate * math.pi
    times = [first_event_time(env, Ball((0.0, 0.0), 1.0), stream_key=k)
             for k in range(600)]
    assert all(t > 0.0 for t in times)
    res = ks_test(times, lambda t: 1.0 - math.exp(-rate_total * t))
    assert res.p_value > 1e-3


def test_run_oracle_validation():
    env = _env()
    with pytest.raises(ConfigError):
        run_oracle(env, _unit_seed(), (-5.0, -5.0), (5.0, 5.0), lambda1=2.0)
    with pytest.raises(ConfigError):
        run_oracle(env, _unit_seed(), (-5.0,), (5.0, 5.0))
    with pytest.raises(ConfigError):
        run_oracle(env, _unit_seed(), (-5.0, 5.0), (5.0, 5.0))
    with pytest.raises(ConfigError):
        run_oracle(env, _unit_seed(), (0.5, -5.0), (5.0, 5.0))
    with pytest.raises(ConfigError):
        run_oracle(env, _unit_seed(), (-5.0, -5.0), (5.0, 5.0),
                   target=(2.0, 0.0), target_ball=Ball((2.0, 0.0), 1.0))


def test_target_inside_seed_reaches_at_time_zero():
    run = run_oracle(_env(), _unit_seed(), (-5.0, -5.0), (5.0, 5.0),
                     target=(0.5, 0.0))
    assert run.reached
    assert run.target_time == 0.0
    assert run.history.stop_reason == "stopped"
    assert not run.history.censored
    assert run.accepted == 0


def test_box_escape_censors_but_keeps_the_ball():
    run = run_oracle(_env(seed=99), _unit_seed(), (-1.05, -1.05), (1.05, 1.05),
                     max_time=1e4)
    assert run.history.stop_reason == "box_escape"
    assert run.history.censored
    assert len(run.history.events) == 1


def test_max_events_censoring():
    run = run_oracle(_env(seed=7), _unit_seed(), (-8.0, -8.0), (8.0, 8.0),
                     max_events=2)
    assert run.history.stop_reason == "max_events"
    assert run.history.censored
    assert len(run.history.events) == 2
    assert run.candidates >= run.accepted == 2


def test_zero_intensity_type_never_fires():
    seeds = [(Ball((-3.0, 0.0), 1.0), 1), (Ball((3.0, 0.0), 1.0), 2)]
    run = run_oracle(_env(seed=314), seeds, (-9.0, -9.0), (9.0, 9.0),
                     lambda1=0.0, lambda2=1.0, max_events=25)
    assert run.accepted == 25
    assert all(b.type_tag == 2 for b in run.history.events)


def test_events_respect_first_cover_typing():
    seeds = [(Ball((-2.5, 0.0), 1.0), 1), (Ball((2.5, 0.0), 1.0), 2)]
    run = run_oracle(_env(seed=2024), seeds, (-12.0, -12.0), (12.0, 12.0),
                     max_events=60)
    balls = list(run.history.balls())
    for i, b in enumerate(balls):
        if b.provenance[0] == "seed":
            continue
        covers = [c for c in balls
                  if c.birth < b.birth and math.dist(c.center, b.center) <= c.radius]
        assert covers
        earliest = min(covers, key=lambda c: c.birth)
        assert b.type_tag == earliest.type_tag


def test_oracle_determinism_by_stream_key():
    kw = dict(max_events=20)
    a = run_oracle(_env(seed=5), _unit_seed(), (-8.0, -8.0), (8.0, 8.0),
                   stream_key=111, **kw)
    b = run_oracle(_env(seed=6), _unit_seed(), (-8.0, -8.0), (8.0, 8.0),
                   stream_key=111, **kw)
    c = run_oracle(_env(seed=5), _unit_seed(), (-8.0, -8.0), (8.0, 8.0),
                   stream_key=112, **kw)
    assert a.history.events == b.history.events
    assert a.history.events != c.history.events


def test_compare_scenario_defaults_and_validation():
    scn = CompareScenario(env=_env(), distance=3.0)
    assert scn.resolved_pad() == 2.5 * 3.0 + 8.0
    assert scn.resolved_max_time() == (64.0 + 32.0 * 3.0) / 1.0
    with pytest.raises(ConfigError):
        CompareScenario(env=_env(), distance=1.0)
    with pytest.raises(ConfigError):
        compare_with_engine(scn, replications=5)


def test_engine_and_oracle_agree_smoke():
    scn = CompareScenario(env=_env(seed=1234567), distance=2.0)
    rep = compare_with_engine(scn, replications=30)
    assert rep.engine_censored == 0
    assert rep.oracle_censored == 0
    assert rep.ks.n1 == 30 and rep.ks.n2 == 30
    assert rep.consistent


def test_comparison_detects_rate_mismatch():
    scn = CompareScenario(env=_env(seed=777, rate=2.0), distance=2.0,
                          rate_oracle=1.0)
    rep = compare_with_engine(scn, replications=40)
    assert not rep.consistent
    assert rep.ks.p_value < 1e-4

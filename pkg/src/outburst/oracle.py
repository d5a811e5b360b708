"""Independent rejection-based simulator for validating the event engine.

The engine schedules outbursts through a lazily materialized marked point
field. This module simulates the same growth law by an unrelated route:
candidate events arrive as a homogeneous Poisson process in time over a
fixed bounding box, each candidate picks a uniform location in the box, and
a candidate is accepted only when its location is already infected. While
the infected set stays inside the box, accepted events occur at rate
lambda * volume(infected set) with locations uniform over the infected set,
which is exactly the model's outburst law. Agreement between the two
simulators on distributional functionals (first firing time, passage times)
is therefore evidence that each is correct, since they share no scheduling
code and consume randomness in entirely different orders.

The box is a hard validity boundary: once a ball pokes outside it, the
uniform-candidate argument no longer covers the whole infected set, so the
run is censored at that event (the escaping ball is kept; it was itself
sampled while the construction was still valid).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .engine import Budget, GrowthBall, History
from .env import EnvConfig
from .errors import ConfigError
from .geom import Ball, BallIndex
from .passage import CoverageTracker, passage_time
from .rng import TAG_ORACLE, UnitStream, derive_seed, make_key
from .stats import KsResult, ks_test
from .util import pmap

_ENGINE_LANE = 0x656E67
_ORACLE_LANE = 0x6F7263


@dataclass(frozen=True)
class OracleRun:
    """One rejection-simulator run."""

    history: History
    target_time: float
    candidates: int
    accepted: int

    @property
    def reached(self) -> bool:
        return not math.isnan(self.target_time)


def run_oracle(
    env: EnvConfig,
    seeds,
    box_low,
    box_high,
    lambda1: float | None = None,
    lambda2: float | None = None,
    target: tuple[float, ...] | None = None,
    target_ball: Ball | None = None,
    delta: float = 1e-3,
    max_time: float = 1e3,
    max_events: int = 200_000,
    stream_key: int | None = None,
) -> OracleRun:
    """Simulate growth by candidate rejection inside a fixed box.

    ``seeds`` is a sequence of (Ball, type_tag) pairs as for the engine.
    Stops when ``target`` (a point) or ``target_ball`` (a ball, coverage
    certified at resolution ``delta``) is reached, or on budget, or when a
    ball escapes the box. The environment's cell and slab layout is
    irrelevant here; only dimension, rate, law, and seed are read.
    """
    d = env.dimension
    lam1 = env.rate if lambda1 is None else lambda1
    lam2 = env.rate if lambda2 is None else lambda2
    if max(lam1, lam2) > env.rate * (1.0 + 1e-12):
        raise ConfigError("per-type intensities must not exceed the environment rate")
    if len(box_low) != d or len(box_high) != d:
        raise ConfigError("box bounds must match the environment dimension")
    vol = 1.0
    for lo, hi in zip(box_low, box_high):
        if not hi > lo:
            raise ConfigError("box must have positive extent on every axis")
        vol *= hi - lo
    candidate_rate = env.rate * vol

    index = BallIndex(d, env.cell_edge)
    seed_balls = []
    for i, (ball, tag) in enumerate(seeds):
        blo, bhi = ball.bbox()
        if any(a < lo or b > hi for a, b, lo, hi in zip(blo, bhi, box_low, box_high)):
            raise ConfigError("seed balls must lie inside the box")
        index.append(ball.center, ball.radius, 0.0, tag)
        seed_balls.append(GrowthBall(ball.center, ball.radius, 0.0, tag, ("seed", i)))

    if target is not None and target_ball is not None:
        raise ConfigError("give a point target or a ball target, not both")
    stream = UnitStream(
        make_key(env.seed, TAG_ORACLE) if stream_key is None else stream_key
    )
    tracker = None
    events: list[GrowthBall] = []
    clock = 0.0
    candidates = 0
    target_time = math.nan
    if target is not None and index.first_cover(tuple(target)) >= 0:
        target_time = 0.0
    if target_ball is not None:
        tracker = CoverageTracker(target_ball, delta, index)
        if tracker.covered:
            target_time = 0.0
    watching = target is not None or target_ball is not None
    reason = None
    censored = False
    while reason is None:
        if watching and not math.isnan(target_time):
            reason = "stopped"
            break
        if len(events) >= max_events:
            reason, censored = "max_events", True
            break
        clock += stream.exponential(candidate_rate)
        if clock > max_time:
            reason, censored, clock = "max_time", True, max_time
            break
        candidates += 1
        loc = tuple(stream.uniform(box_low[k], box_high[k]) for k in range(d))
        bi = index.first_cover(loc)
        thin = stream.unit()
        radius_u = stream.unit()
        if bi < 0:
            continue
        tag = index.types[bi]
        ratio = lam1 / env.rate if tag == 1 else lam2 / env.rate
        if thin > ratio:
            continue
        radius = env.law.sample_at(radius_u)
        bid = index.append(loc, radius, clock, tag)
        events.append(GrowthBall(loc, radius, clock, tag, ("o", len(events))))
        if target is not None and math.isnan(target_time):
            s = 0.0
            for k in range(d):
                dx = loc[k] - target[k]
                s += dx * dx
            if s <= radius * radius:
                target_time = clock
        if tracker is not None and not tracker.covered:
            if tracker.on_ball(bid, clock):
                target_time = tracker.cover_time
        escaped = any(
            loc[k] - radius < box_low[k] or loc[k] + radius > box_high[k]
            for k in range(d)
        )
        if escaped:
            reason, censored = "box_escape", True
    history = History(
        dimension=d,
        seeds=tuple(seed_balls),
        events=tuple(events),
        clock=clock,
        stop_reason=reason,
        censored=censored,
        audit={
            "candidates": candidates,
            "events_fired": len(events),
            "events_discarded": 0,
        },
    )
    return OracleRun(history, target_time, candidates, len(events))


def first_event_time(
    env: EnvConfig,
    ball: Ball,
    max_time: float = 1e3,
    stream_key: int | None = None,
) -> float:
    """Time of the first outburst for a single seed ball, by rejection.

    Distributed Exp(rate * volume(ball)); used as a closed-form anchor in
    validation. Returns NaN when censored at ``max_time``.
    """
    lo, hi = ball.bbox()
    run = run_oracle(
        env,
        [(ball, 1)],
        tuple(c - 1e-9 for c in lo),
        tuple(c + 1e-9 for c in hi),
        max_time=max_time,
        max_events=1,
        stream_key=stream_key,
    )
    if run.history.events:
        return run.history.events[0].birth
    return math.nan


@dataclass(frozen=True)
class CompareScenario:
    """One engine-versus-oracle comparison setup.

    Both sides start from a unit ball at the origin and measure the
    passage time to the unit ball at ``distance`` along the first axis
    (full coverage, certified at ``delta``). ``rate_oracle`` defaults to
    the engine rate; setting it differently turns the comparison into a
    power self-test that must detect the mismatch.
    """

    env: EnvConfig
    distance: float = 2.5
    rate_oracle: float | None = None
    max_time: float | None = None
    box_pad: float | None = None
    delta: float = 1e-3

    def __post_init__(self):
        if not (math.isfinite(self.distance) and self.distance > 1.0):
            raise ConfigError("distance must exceed the starting radius 1")

    def resolved_max_time(self) -> float:
        if self.max_time is not None:
            return self.max_time
        return (64.0 + 32.0 * self.distance) / self.env.rate

    def resolved_pad(self) -> float:
        if self.box_pad is not None:
            return self.box_pad
        return 2.5 * self.distance + 8.0


@dataclass(frozen=True)
class CompareReport:
    engine_times: tuple[float, ...]
    oracle_times: tuple[float, ...]
    ks: KsResult
    engine_censored: int
    oracle_censored: int

    @property
    def consistent(self) -> bool:
        """No detected distributional difference at the 0.1% level."""
        return self.ks.p_value >= 1e-3


def _engine_time(args) -> float:
    scn, rep = args
    env = scn.env
    env_r = EnvConfig(
        env.dimension,
        env.rate,
        derive_seed(env.seed, _ENGINE_LANE, rep),
        env.law,
        env.cell_edge,
        env.slab_height,
    )
    d = env.dimension
    target = (scn.distance,) + (0.0,) * (d - 1)
    budget = Budget(
        max_events=2_000_000,
        max_time=scn.resolved_max_time(),
        max_extent=scn.distance + 16.0,
    )
    res = passage_time(env_r, (0.0,) * d, target, scn.delta, budget)
    return res.time


def _oracle_time(args) -> float:
    scn, rep = args
    env = scn.env
    rate = env.rate if scn.rate_oracle is None else scn.rate_oracle
    env_r = EnvConfig(
        env.dimension,
        rate,
        derive_seed(env.seed, _ORACLE_LANE, rep),
        env.law,
        env.cell_edge,
        env.slab_height,
    )
    d = env.dimension
    target = (scn.distance,) + (0.0,) * (d - 1)
    pad = scn.resolved_pad()
    box_low = (-pad,) * d
    box_high = (scn.distance + pad,) + (pad,) * (d - 1)
    run = run_oracle(
        env_r,
        [(Ball((0.0,) * d, 1.0), 1)],
        box_low,
        box_high,
        target_ball=Ball(target, 1.0),
        delta=scn.delta,
        max_time=scn.resolved_max_time(),
        max_events=500_000,
        stream_key=make_key(env_r.seed, TAG_ORACLE, rep),
    )
    return run.target_time if run.reached else math.nan


def compare_with_engine(
    scenario: CompareScenario,
    replications: int = 200,
    jobs: int = 1,
) -> CompareReport:
    """Two-sample KS comparison of engine and oracle passage times.

    Runs ``replications`` independent replications of each simulator and
    compares the resulting samples. Censored replications are dropped from
    the test but reported.
    """
    if replications < 10:
        raise ConfigError("need at least 10 replications per side")
    args = [(scenario, rep) for rep in range(replications)]
    eng_times = pmap(_engine_time, args, jobs)
    ora_times = pmap(_oracle_time, args, jobs)
    eng_ok = tuple(t for t in eng_times if not math.isnan(t))
    ora_ok = tuple(t for t in ora_times if not math.isnan(t))
    ks = ks_test(eng_ok, ora_ok)
    return CompareReport(
        engine_times=eng_ok,
        oracle_times=ora_ok,
        ks=ks,
        engine_censored=replications - len(eng_ok),
        oracle_censored=replications - len(ora_ok),
    )

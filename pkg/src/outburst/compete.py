"""Two-type competition runs and coexistence estimation.

Both types grow over one shared environment; a firing of a type-i location
is kept with probability lambda_i / rate. Coexistence at scale k is the
event that each type places an outburst ball containing a previously
uninfected point outside the ball of radius k around the arena center (the
midpoint between the two types' initial centroids). Those exit events are
monotone: a run that exits at a larger radius has exited at every smaller
one, and the per-run record preserves that by construction.

A type is certified frozen when every one of its balls, dilated by the
radius-law bound, is covered by the union of all balls: any future outburst
of that type then lands entirely inside already-infected territory, so its
territory and its exit record are final. Certification requires a bounded
radius law.
"""

from __future__ import annotations

import math
import warnings
from array import array
from dataclasses import dataclass, field

from . import _kernels
from .engine import Budget, Engine, History
from .env import EnvConfig
from .errors import ConfigError, UnboundedLawError
from .geom import Ball, BallIndex
from .rng import to_u64
from .stats import ProportionInterval, wilson_interval
from .util import pmap


def default_seeds(cfg: EnvConfig, separation: float) -> tuple[tuple[Ball, int], ...]:
    """Standard head-to-head start: unit balls at the origin and at
    separation * e1, types 1 and 2."""
    d = cfg.dimension
    a = Ball((0.0,) * d, 1.0)
    b = Ball((float(separation),) + (0.0,) * (d - 1), 1.0)
    return ((a, 1), (b, 2))


@dataclass(frozen=True)
class CompeteConfig:
    env: EnvConfig
    lambda1: float
    lambda2: float
    separation: float = 8.0
    seeds: tuple[tuple[Ball, int], ...] | None = None
    exit_radii: tuple[float, ...] = (5.0, 10.0, 15.0)
    delta: float = 1e-3
    budget: Budget | None = None
    freeze_interval: int = 400

    def __post_init__(self):
        if not self.exit_radii or list(self.exit_radii) != sorted(set(self.exit_radii)):
            raise ConfigError("exit_radii must be increasing and distinct")
        if min(self.exit_radii) <= 0:
            raise ConfigError("exit_radii must be positive")
        if self.freeze_interval < 0:
            raise ConfigError("freeze_interval must be nonnegative")

    def resolved_seeds(self) -> tuple[tuple[Ball, int], ...]:
        if self.seeds is not None:
            return self.seeds
        return default_seeds(self.env, self.separation)

    def arena_center(self) -> tuple[float, ...]:
        seeds = self.resolved_seeds()
        d = self.env.dimension
        cents = {1: [], 2: []}
        for ball, tag in seeds:
            cents[tag].append(ball.center)
        mids = []
        for tag in (1, 2):
            pts = cents[tag]
            if not pts:
                raise ConfigError("competition needs seeds of both types")
            mids.append(tuple(sum(p[k] for p in pts) / len(pts) for k in range(d)))
        return tuple(0.5 * (mids[0][k] + mids[1][k]) for k in range(d))

    def resolved_budget(self) -> Budget:
        if self.budget is not None:
            return self.budget
        top = max(self.exit_radii)
        return Budget(
            max_events=5_000_000,
            max_time=(96.0 + 48.0 * top) / self.env.rate,
            max_extent=4.0 * top,
        )


@dataclass(frozen=True)
class CompeteOutcome:
    """Per-run record of exit and freeze certification events."""

    exit_radii: tuple[float, ...]
    exit_times: dict[tuple[int, float], float] = field(compare=False)
    frozen_times: dict[int, float] = field(compare=False)
    censored: bool = False
    stop_reason: str = ""
    events: int = 0
    clock: float = 0.0

    def exited(self, type_tag: int, k: float) -> bool:
        return (type_tag, k) in self.exit_times

    def coexist_status(self, k: float) -> bool | None:
        """True/False when the run decided coexistence at scale k, None when
        the run was censored before deciding it."""
        if self.exited(1, k) and self.exited(2, k):
            return True
        for tag in (1, 2):
            if not self.exited(tag, k) and tag in self.frozen_times:
                return False
        if not self.censored:
            return False
        return None


class _ExitTracker:
    def __init__(self, center: tuple[float, ...], radii: tuple[float, ...], delta: float,
                 index: BallIndex):
        self.center = center
        self.radii = radii
        self.delta = delta
        self.index = index
        self.exit_times: dict[tuple[int, float], float] = {}

    def on_ball(self, bid: int, now: float):
        """Record exits witnessed by the newly appended ball.

        Radii are checked in descending order so a certified witness outside
        the largest radius also certifies, by inclusion, every smaller one;
        exit sets are therefore nested per type within every run, exactly.
        """
        index = self.index
        d = index.dimension
        base = bid * d
        tag = index.types[bid]
        s = 0.0
        for k in range(d):
            dx = index.centers[base + k] - self.center[k]
            s += dx * dx
        reach = math.sqrt(s) + index.radii[bid]
        loc = tuple(index.centers[base : base + d])
        rho = index.radii[bid]
        lo = tuple(c - rho for c in loc)
        hi = tuple(c + rho for c in loc)
        cands = None
        for pos in range(len(self.radii) - 1, -1, -1):
            kr = self.radii[pos]
            if (tag, kr) in self.exit_times:
                break
            if reach <= kr:
                continue
            if cands is None:
                cands = list(self.index.candidates_in_box(lo, hi, exclude=bid))
            centers = array("d", index.centers)
            centers.extend(self.center)
            radii = array("d", index.radii)
            radii.append(kr)
            ghost = [len(index.radii)]
            res = _kernels.find_uncovered_core(
                lo,
                hi,
                loc,
                rho,
                cands + ghost,
                centers,
                radii,
                self.delta,
                d,
            )
            if res is not None and res[1]:
                for kq in self.radii[: pos + 1]:
                    self.exit_times.setdefault((tag, kq), now)
                break


class _FreezeTracker:
    def __init__(self, bound: float, delta: float, index: BallIndex):
        self.bound = bound
        self.delta = delta
        self.index = index
        self.frontier = {1: 0, 2: 0}
        self.frozen_times: dict[int, float] = {}

    def sweep(self, type_tag: int, now: float) -> bool:
        """Try to certify every ball of ``type_tag`` as unable to extend its
        territory; resumes where the last sweep stopped."""
        if type_tag in self.frozen_times:
            return True
        index = self.index
        d = index.dimension
        i = self.frontier[type_tag]
        n = len(index.radii)
        while i < n:
            if index.types[i] == type_tag:
                base = i * d
                loc = tuple(index.centers[base : base + d])
                rr = index.radii[i] + self.bound
                lo = tuple(c - rr for c in loc)
                hi = tuple(c + rr for c in loc)
                cands = index.candidates_in_box(lo, hi)
                res = _kernels.find_uncovered_core(
                    lo, hi, loc, rr, cands, index.centers, index.radii, self.delta, d
                )
                if res is not None:
                    self.frontier[type_tag] = i
                    return False
            i += 1
        self.frontier[type_tag] = n
        self.frozen_times[type_tag] = now
        return True


def _warn_enclosure(cfg: CompeteConfig):
    """Heuristic warning for bounded laws with one type's start surrounding
    the other's: surrounded starts can be walled in from time zero."""
    if not math.isfinite(cfg.env.law.bound):
        return
    seeds = cfg.resolved_seeds()
    boxes = {1: None, 2: None}
    for ball, tag in seeds:
        lo, hi = ball.bbox()
        cur = boxes[tag]
        if cur is None:
            boxes[tag] = [list(lo), list(hi)]
        else:
            for k in range(len(lo)):
                cur[0][k] = min(cur[0][k], lo[k])
                cur[1][k] = max(cur[1][k], hi[k])
    for a, b in ((1, 2), (2, 1)):
        inner, outer = boxes[a], boxes[b]
        if inner and outer and all(
            outer[0][k] < inner[0][k] and inner[1][k] < outer[1][k]
            for k in range(len(inner[0]))
        ):
            warnings.warn(
                f"type {b}'s initial geometry strictly surrounds type {a}'s; "
                "with a bounded radius law the surrounded type may be unable "
                "to ever escape",
                stacklevel=3,
            )


class _CompeteStop:
    def __init__(self, cfg: CompeteConfig, exits: _ExitTracker, freeze: _FreezeTracker | None):
        self.exits = exits
        self.freeze = freeze
        self.top = max(cfg.exit_radii)
        self.interval = cfg.freeze_interval
        self._since_sweep = 0

    def _decided(self, eng: Engine) -> bool:
        for tag in (1, 2):
            if (tag, self.top) in self.exits.exit_times:
                continue
            if self.freeze is not None and tag in self.freeze.frozen_times:
                continue
            return False
        return True

    def _race_open(self) -> bool:
        # Freeze certification can only matter once one type has escaped
        # and the other is the candidate for being walled in; sweeping
        # before that point costs a coverage pass and can never certify
        # anything the decision needs.
        a = (1, self.top) in self.exits.exit_times
        b = (2, self.top) in self.exits.exit_times
        return a != b

    def __call__(self, eng: Engine) -> bool:
        if eng.last_id >= eng.n_seeds:
            self.exits.on_ball(eng.last_id, eng.clock)
            self._since_sweep += 1
        if (
            self.freeze is not None
            and self.interval > 0
            and self._since_sweep >= self.interval
            and self._race_open()
        ):
            self._since_sweep = 0
            for tag in (1, 2):
                if (tag, self.top) not in self.exits.exit_times:
                    self.freeze.sweep(tag, eng.clock)
        return self._decided(eng)


def run_compete(cfg: CompeteConfig) -> CompeteOutcome:
    """Run one two-type competition to decision or budget.

    The run stops once every type has either exited the largest tracked
    radius or been certified frozen. With an unbounded radius law freeze
    certification is unavailable and undecided runs end censored.
    """
    _warn_enclosure(cfg)
    seeds = cfg.resolved_seeds()
    budget = cfg.resolved_budget()
    eng = Engine(cfg.env, seeds, cfg.lambda1, cfg.lambda2, budget)
    exits = _ExitTracker(cfg.arena_center(), tuple(cfg.exit_radii), cfg.delta, eng.index)
    freeze = None
    if cfg.freeze_interval > 0 and math.isfinite(cfg.env.law.bound):
        freeze = _FreezeTracker(cfg.env.law.bound, cfg.delta, eng.index)
    history = eng.run(_CompeteStop(cfg, exits, freeze))
    return CompeteOutcome(
        exit_radii=tuple(cfg.exit_radii),
        exit_times=dict(exits.exit_times),
        frozen_times=dict(freeze.frozen_times) if freeze else {},
        censored=history.censored,
        stop_reason=history.stop_reason,
        events=len(history.events),
        clock=history.clock,
    )


def frozen_check(history: History, type_tag: int, bound: float, delta: float = 1e-3) -> bool:
    """Whether ``type_tag`` is provably unable to extend its territory.

    Sufficient certificate: every ball of the type, dilated by ``bound``
    (an upper bound on outburst radii), is covered by the union of all
    balls. Raises for unbounded laws, where no such certificate exists.
    """
    if not math.isfinite(bound) or bound <= 0.0:
        raise UnboundedLawError(
            "freeze certification requires a finite positive radius bound"
        )
    index = BallIndex(history.dimension, max(1.0, bound))
    for b in history.balls():
        index.append(b.center, b.radius, b.birth, b.type_tag)
    tracker = _FreezeTracker(bound, delta, index)
    return tracker.sweep(type_tag, history.clock)


@dataclass(frozen=True)
class CoexistenceRow:
    """Aggregated coexistence outcome at one scale."""

    radius: float
    decided_true: int
    decided_false: int
    unresolved: int
    pessimistic: ProportionInterval
    optimistic: ProportionInterval
    exits_type1: int
    exits_type2: int


@dataclass(frozen=True)
class CoexistenceEstimate:
    replications: int
    confidence: float
    rows: tuple[CoexistenceRow, ...]
    censored_runs: int
    outcomes: tuple[CompeteOutcome, ...] = field(compare=False, repr=False)

    def row(self, k: float) -> CoexistenceRow:
        for r in self.rows:
            if r.radius == k:
                return r
        raise KeyError(k)


def _coexist_worker(args) -> CompeteOutcome:
    cfg, rep = args
    env = cfg.env
    env_r = EnvConfig(
        env.dimension,
        env.rate,
        to_u64(env.seed) ^ rep,
        env.law,
        env.cell_edge,
        env.slab_height,
    )
    cfg_r = CompeteConfig(
        env=env_r,
        lambda1=cfg.lambda1,
        lambda2=cfg.lambda2,
        separation=cfg.separation,
        seeds=cfg.seeds,
        exit_radii=cfg.exit_radii,
        delta=cfg.delta,
        budget=cfg.budget,
        freeze_interval=cfg.freeze_interval,
    )
    return run_compete(cfg_r)


def estimate_coexistence(
    cfg: CompeteConfig,
    replications: int,
    confidence: float = 0.95,
    jobs: int = 1,
) -> CoexistenceEstimate:
    """Monte Carlo coexistence probabilities across independent
    replications (environment seed XOR replication index).

    Censored runs count as unresolved at the scales they did not decide;
    the pessimistic interval scores unresolved as non-coexistence, the
    optimistic one as coexistence.
    """
    if replications < 1:
        raise ConfigError("need at least one replication")
    outcomes = pmap(_coexist_worker, [(cfg, rep) for rep in range(replications)], jobs)
    rows = []
    for k in cfg.exit_radii:
        t = f = u = 0
        e1 = e2 = 0
        for out in outcomes:
            status = out.coexist_status(k)
            if status is True:
                t += 1
            elif status is False:
                f += 1
            else:
                u += 1
            e1 += out.exited(1, k)
            e2 += out.exited(2, k)
        rows.append(
            CoexistenceRow(
                radius=k,
                decided_true=t,
                decided_false=f,
                unresolved=u,
                pessimistic=wilson_interval(t, replications, confidence),
                optimistic=wilson_interval(t + u, replications, confidence),
                exits_type1=e1,
                exits_type2=e2,
            )
        )
    return CoexistenceEstimate(
        replications=replications,
        confidence=confidence,
        rows=tuple(rows),
        censored_runs=sum(1 for o in outcomes if o.censored),
        outcomes=tuple(outcomes),
    )

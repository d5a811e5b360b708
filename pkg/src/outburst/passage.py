"""Passage times, pathwise subadditivity audits, and growth-rate estimation.

The passage time T(x, y) is the first instant at which the unit ball around
y is entirely infected, in the one-type process started from the unit ball
around x. Coverage is certified at resolution ``delta``; since a Covered
verdict has no false positives, measured times can only err late, by at
most the time the front needs to sweep a delta-neighborhood. Runs seeded at
different centers over the same environment are pathwise comparable, which
gives the triangle inequality T(x,y) <= T(x,z) + T(z,y) run by run, up to
that delta slack.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass, field
from typing import Sequence

from . import _kernels
from .engine import Budget, Engine, History, classify_point
from .env import EnvConfig
from .errors import ConfigError, ParameterError
from .geom import Ball, BallIndex
from .rng import TAG_PROBE, UnitStream, derive_seed, make_key
from .stats import normal_quantile, quantile
from .util import pmap

_LBL_MU = 0x6D75
_LBL_DIFF = 0x64696666
_LBL_SHIFT = 0x74726E73
_LBL_TELE = 0x74656C65


class CoverageTracker:
    """Tracks whether a target ball is fully covered by a growing index.

    Keeps the current uncovered witness and re-runs the full subdivision
    only when a new ball actually contains that witness; any ball that
    misses the witness cannot have completed the coverage.
    """

    def __init__(self, target: Ball, delta: float, index: BallIndex):
        self.target = target
        self.delta = delta
        self.index = index
        self.covered = False
        self.cover_time: float | None = None
        self.witness: tuple[float, ...] | None = None
        self.full_checks = 0
        self._lo, self._hi = target.bbox()
        self._rr = target.radius * target.radius
        self.refresh(0.0)

    def refresh(self, now: float):
        if self.covered:
            return
        self.full_checks += 1
        cands = self.index.candidates_in_box(self._lo, self._hi)
        d = self.index.dimension
        for bid in cands:
            # One ball containing the whole target settles coverage exactly,
            # with no resolution ambiguity at the target boundary.
            base = bid * d
            s = 0.0
            for k in range(d):
                dx = self.target.center[k] - self.index.centers[base + k]
                s += dx * dx
            if math.sqrt(s) + self.target.radius <= self.index.radii[bid]:
                self.covered = True
                self.cover_time = now
                self.witness = None
                return
        res = _kernels.find_uncovered_core(
            self._lo,
            self._hi,
            self.target.center,
            self.target.radius,
            cands,
            self.index.centers,
            self.index.radii,
            self.delta,
            self.index.dimension,
        )
        if res is None:
            self.covered = True
            self.cover_time = now
            self.witness = None
        else:
            self.witness = res[0]

    def on_ball(self, bid: int, now: float) -> bool:
        """Notify of a newly appended ball; returns True when this ball
        completed the coverage."""
        if self.covered:
            return False
        w = self.witness
        d = self.index.dimension
        base = bid * d
        s = 0.0
        for k in range(d):
            dx = w[k] - self.index.centers[base + k]
            s += dx * dx
        r = self.index.radii[bid]
        if s > r * r:
            return False
        self.refresh(now)
        return self.covered


@dataclass(frozen=True)
class PassageResult:
    """Outcome of one passage-time run. ``time`` is NaN when censored, and
    ``bound`` then names the budget that bit."""

    time: float
    events: int
    delta: float
    censored: bool
    bound: str | None
    audit: dict[str, int] = field(compare=False, default_factory=dict)


def _default_budget(cfg: EnvConfig, distance: float) -> Budget:
    max_time = (64.0 + 32.0 * distance) / cfg.rate
    return Budget(max_events=5_000_000, max_time=max_time, max_extent=distance + 24.0)


class _MultiTargetStop:
    """Stop once every tracked target is covered and the clock has passed a
    (possibly tracker-dependent) minimum."""

    def __init__(self, trackers: Sequence[CoverageTracker], min_time_fn=None):
        self.trackers = trackers
        self.min_time_fn = min_time_fn

    def __call__(self, eng: Engine) -> bool:
        if eng.last_id >= eng.n_seeds:
            for tr in self.trackers:
                tr.on_ball(eng.last_id, eng.clock)
        if not all(tr.covered for tr in self.trackers):
            return False
        if self.min_time_fn is not None and eng.clock < self.min_time_fn():
            return False
        return True


def _run_to_targets(
    cfg: EnvConfig,
    x: Sequence[float],
    targets: Sequence[Ball],
    delta: float,
    budget: Budget,
    min_time_fn=None,
) -> tuple[History, list[CoverageTracker]]:
    seed = (Ball(tuple(x), 1.0), 1)
    eng = Engine(cfg, [seed], cfg.rate, cfg.rate, budget)
    trackers = [CoverageTracker(t, delta, eng.index) for t in targets]
    history = eng.run(_MultiTargetStop(trackers, min_time_fn))
    return history, trackers


def passage_time(
    cfg: EnvConfig,
    x: Sequence[float],
    y: Sequence[float],
    delta: float = 1e-3,
    budget: Budget | None = None,
) -> PassageResult:
    """Time for growth seeded at the unit ball around x to cover the unit
    ball around y, certified at resolution ``delta``."""
    x = tuple(float(v) for v in x)
    y = tuple(float(v) for v in y)
    if len(x) != cfg.dimension or len(y) != cfg.dimension:
        raise ParameterError("x and y must match the environment dimension")
    dist = math.dist(x, y)
    if budget is None:
        budget = _default_budget(cfg, dist)
    history, trackers = _run_to_targets(cfg, x, [Ball(y, 1.0)], delta, budget)
    tr = trackers[0]
    if tr.covered:
        return PassageResult(
            time=tr.cover_time,
            events=len(history.events),
            delta=delta,
            censored=False,
            bound=None,
            audit=history.audit,
        )
    return PassageResult(
        time=math.nan,
        events=len(history.events),
        delta=delta,
        censored=True,
        bound=history.stop_reason,
        audit=history.audit,
    )


@dataclass(frozen=True)
class TripleResult:
    """Coupled passage times T(x,y), T(x,z), T(z,y) over one environment,
    with the inclusion audit of the run seeded at z against the run seeded
    at x shifted by T(x,z)."""

    t_xy: float
    t_xz: float
    t_zy: float
    slack: float
    probes: int
    probe_failures: int
    censored: bool
    events: int

    @property
    def excess(self) -> float:
        """Amount by which T(x,y) exceeds T(x,z) + T(z,y) beyond the slack
        (nonpositive when the triangle inequality holds)."""
        return self.t_xy - (self.t_xz + self.t_zy + self.slack)

    @property
    def violated(self) -> bool:
        """True when the triangle inequality fails beyond the slack."""
        return self.excess > 0.0


def coupled_triple(
    cfg: EnvConfig,
    x: Sequence[float],
    z: Sequence[float],
    y: Sequence[float],
    delta: float = 1e-3,
    budget: Budget | None = None,
    probes: int = 100,
) -> TripleResult:
    """Audit pathwise subadditivity through waypoint z on one environment.

    Runs the process from z (measuring T(z,y)), then from x on the same
    environment, measuring T(x,z) and T(x,y) and continuing until time
    T(x,z) + T(z,y) so the inclusion audit can probe the full window:
    every probe point infected at time t in the z-run must be infected by
    time T(x,z) + t in the x-run. The allowed slack is 10 * delta divided
    by the measured front speed |x - y| / T(x,y).
    """
    x = tuple(float(v) for v in x)
    z = tuple(float(v) for v in z)
    y = tuple(float(v) for v in y)
    d_xz = math.dist(x, z)
    d_zy = math.dist(z, y)
    d_xy = math.dist(x, y)
    if budget is None:
        span = d_xz + d_zy
        budget = Budget(
            max_events=10_000_000,
            max_time=(64.0 + 32.0 * span) / cfg.rate,
            max_extent=span + 24.0,
        )
    hist_b, tr_b = _run_to_targets(cfg, z, [Ball(y, 1.0)], delta, budget)
    t_zy = tr_b[0].cover_time if tr_b[0].covered else math.nan
    if math.isnan(t_zy):
        return TripleResult(math.nan, math.nan, math.nan, math.nan, 0, 0, True, len(hist_b.events))

    eng = Engine(cfg, [(Ball(x, 1.0), 1)], cfg.rate, cfg.rate, budget)
    tr_a = [CoverageTracker(Ball(z, 1.0), delta, eng.index),
            CoverageTracker(Ball(y, 1.0), delta, eng.index)]

    def min_time():
        t_xz = tr_a[0].cover_time
        return t_xz + t_zy if t_xz is not None else math.inf

    hist_a = eng.run(_MultiTargetStop(tr_a, min_time))
    if not (tr_a[0].covered and tr_a[1].covered) or hist_a.censored:
        return TripleResult(
            math.nan, math.nan, math.nan, math.nan, 0, 0, True,
            len(hist_a.events) + len(hist_b.events),
        )
    t_xz = tr_a[0].cover_time
    t_xy = tr_a[1].cover_time

    speed = d_xy / t_xy if t_xy > 0.0 else math.inf
    slack = 10.0 * delta / speed if math.isfinite(speed) else 0.0

    failures = 0
    n_probes = 0
    if probes > 0 and t_zy > 0.0:
        stream = UnitStream(make_key(cfg.seed, TAG_PROBE, 1))
        balls_b = list(hist_b.balls())
        births_b = [b.birth for b in balls_b]
        for _ in range(probes):
            t = stream.unit() * t_zy
            m = bisect_right(births_b, t)
            if m == 0:
                continue
            b = balls_b[stream.index(m)]
            p = stream.point_in_ball(b.center, b.radius)
            n_probes += 1
            if classify_point(hist_a, p, t_xz + t) is None:
                failures += 1

    return TripleResult(
        t_xy=t_xy,
        t_xz=t_xz,
        t_zy=t_zy,
        slack=slack,
        probes=n_probes,
        probe_failures=failures,
        censored=False,
        events=len(hist_a.events) + len(hist_b.events),
    )


def _min_reps(replications: int):
    if replications < 30:
        raise ConfigError(f"need at least 30 replications, got {replications}")


@dataclass(frozen=True)
class MuEstimate:
    """Per-distance normalized passage times and the inverse-speed estimate.

    ``mu_hat`` is rate * mean(T)/n at the largest distance: the expected
    time per unit distance after rescaling to a rate-1 environment.

    Two kinds of per-distance intervals are reported. ``ci_low``/``ci_high``
    are confidence intervals for the mean of T/n; ``spread_low``/``spread_high``
    are central empirical quantile ranges of the T/n samples themselves.
    """

    distances: tuple[float, ...]
    means: tuple[float, ...]
    standard_errors: tuple[float, ...]
    ci_low: tuple[float, ...]
    ci_high: tuple[float, ...]
    spread_low: tuple[float, ...]
    spread_high: tuple[float, ...]
    counts: tuple[int, ...]
    censored: tuple[int, ...]
    mu_hat: float
    mu_hat_se: float
    confidence: float

    def intervals_overlap(self) -> bool:
        """Whether the per-distance sample spread intervals pairwise overlap.

        This is the convergence diagnostic. It compares the central quantile
        ranges of the normalized samples, not confidence intervals for their
        means: the mean of T/n carries a first-order 1/n bias (the front must
        clear the far side of the unit target ball, and young fronts are
        slower per unit distance), so mean-level intervals at two distances
        separate once replications grow, no matter how consistent the
        simulator is. The sample ranges stay comparable and shrink toward
        the same limit.
        """
        lo = max(self.spread_low)
        hi = min(self.spread_high)
        return lo <= hi


def _mu_worker(args) -> float:
    cfg, n, delta = args
    e1 = (1.0,) + (0.0,) * (cfg.dimension - 1)
    y = tuple(n * c for c in e1)
    res = passage_time(cfg, (0.0,) * cfg.dimension, y, delta)
    return res.time


def estimate_mu(
    cfg: EnvConfig,
    distances: Sequence[float],
    replications: int,
    confidence: float = 0.95,
    delta: float = 1e-3,
    jobs: int = 1,
) -> MuEstimate:
    """Estimate the time constant from independent passage times at several
    distances along the first axis."""
    if len(distances) < 2:
        raise ConfigError("need at least two distances")
    if sorted(set(distances)) != list(distances) or min(distances) <= 0:
        raise ConfigError("distances must be positive, increasing, and distinct")
    _min_reps(replications)
    z = normal_quantile(0.5 + confidence / 2.0)
    tail = (1.0 - confidence) / 2.0
    means, ses, los, his, counts, ncens = [], [], [], [], [], []
    slos, shis = [], []
    for idx, n in enumerate(distances):
        tasks = [
            (
                EnvConfig(
                    cfg.dimension,
                    cfg.rate,
                    derive_seed(cfg.seed, _LBL_MU, idx, rep),
                    cfg.law,
                    cfg.cell_edge,
                    cfg.slab_height,
                ),
                n,
                delta,
            )
            for rep in range(replications)
        ]
        times = pmap(_mu_worker, tasks, jobs)
        ok = [t for t in times if not math.isnan(t)]
        cens = len(times) - len(ok)
        if len(ok) < 2:
            raise ConfigError(f"distance {n}: too many censored runs ({cens})")
        mean = sum(ok) / len(ok)
        var = sum((t - mean) ** 2 for t in ok) / (len(ok) - 1)
        se = math.sqrt(var / len(ok))
        means.append(mean / n)
        ses.append(se / n)
        los.append((mean - z * se) / n)
        his.append((mean + z * se) / n)
        normalized = [t / n for t in ok]
        slos.append(quantile(normalized, tail))
        shis.append(quantile(normalized, 1.0 - tail))
        counts.append(len(ok))
        ncens.append(cens)
    mu_hat = cfg.rate * means[-1]
    mu_hat_se = cfg.rate * ses[-1]
    return MuEstimate(
        distances=tuple(distances),
        means=tuple(means),
        standard_errors=tuple(ses),
        ci_low=tuple(los),
        ci_high=tuple(his),
        spread_low=tuple(slos),
        spread_high=tuple(shis),
        counts=tuple(counts),
        censored=tuple(ncens),
        mu_hat=mu_hat,
        mu_hat_se=mu_hat_se,
        confidence=confidence,
    )


@dataclass(frozen=True)
class DiffExperimentConfig:
    """Shifted-difference experiment: coupled estimates of
    E[T(n*e1, -m*e1) - T(0, -m*e1)] for each m in ``m_values``."""

    n: float
    m_values: tuple[float, ...]
    replications: int
    epsilon: float = 0.25
    delta: float = 1e-3
    telescope_segments: int = 3

    def __post_init__(self):
        if self.n <= 0 or not self.m_values or min(self.m_values) <= 0:
            raise ConfigError("n and every m must be positive")
        if self.epsilon <= 0 or self.epsilon >= 1:
            raise ConfigError("epsilon must lie in (0, 1)")
        if self.telescope_segments < 2:
            raise ConfigError("telescope_segments must be at least 2")


@dataclass(frozen=True)
class TelescopeReport:
    """Algebraic self-check: per-replication increment estimators along a
    segmented span must sum to the full-span estimator exactly."""

    segment_estimates: tuple[float, ...]
    total_estimate: float
    max_relative_error: float


@dataclass(frozen=True)
class DiffResult:
    m_values: tuple[float, ...]
    estimates: tuple[float, ...]
    standard_errors: tuple[float, ...]
    counts: tuple[int, ...]
    censored: tuple[int, ...]
    n: float
    epsilon: float
    telescope: TelescopeReport

    def lower_bound_ok(self, mu_time: float, confidence: float = 0.90) -> bool:
        """Whether the largest shifted-difference estimate is consistent, at
        the given one-sided confidence, with being at least
        (1 - epsilon) * n * mu_time, the asymptotic floor implied by
        superadditivity of expected passage times."""
        z = normal_quantile(confidence)
        best = max(e + z * s for e, s in zip(self.estimates, self.standard_errors))
        return best >= (1.0 - self.epsilon) * self.n * mu_time


def _diff_worker(args) -> tuple[float, float]:
    cfg, n, m, delta = args
    d = cfg.dimension
    y = (-m,) + (0.0,) * (d - 1)
    a = passage_time(cfg, (n,) + (0.0,) * (d - 1), y, delta)
    b = passage_time(cfg, (0.0,) * d, y, delta)
    return a.time, b.time


def _telescope_worker(args) -> list[float]:
    cfg, n, segments, delta = args
    d = cfg.dimension
    targets = [Ball((n * (j + 1),) + (0.0,) * (d - 1), 1.0) for j in range(segments)]
    span = n * segments
    budget = Budget(
        max_events=10_000_000,
        max_time=(64.0 + 32.0 * span) / cfg.rate,
        max_extent=span + 24.0,
    )
    _, trackers = _run_to_targets(cfg, (0.0,) * d, targets, delta, budget)
    return [tr.cover_time if tr.covered else math.nan for tr in trackers]


def telescoping_identity(
    cfg: EnvConfig,
    n: float,
    segments: int,
    replications: int,
    delta: float = 1e-3,
    jobs: int = 1,
) -> TelescopeReport:
    """Measure, per replication, passage times to each multiple of n along
    the first axis, and compare the sum of increment estimators against the
    full-span estimator. The identity is algebraic; only floating
    summation error should remain."""
    tasks = [
        (
            EnvConfig(
                cfg.dimension,
                cfg.rate,
                derive_seed(cfg.seed, _LBL_TELE, rep),
                cfg.law,
                cfg.cell_edge,
                cfg.slab_height,
            ),
            n,
            segments,
            delta,
        )
        for rep in range(replications)
    ]
    rows = [r for r in pmap(_telescope_worker, tasks, jobs) if not any(map(math.isnan, r))]
    if not rows:
        raise ConfigError("all telescoping replications censored")
    k = segments
    incs = []
    for j in range(k):
        acc = 0.0
        for r in rows:
            prev = r[j - 1] if j > 0 else 0.0
            acc += r[j] - prev
        incs.append(acc / len(rows))
    total = sum(r[k - 1] for r in rows) / len(rows)
    err = abs(sum(incs) - total) / abs(total) if total != 0.0 else abs(sum(incs))
    return TelescopeReport(tuple(incs), total, err)


def diff_expectation(
    cfg: EnvConfig,
    exp: DiffExperimentConfig,
    jobs: int = 1,
) -> DiffResult:
    """Coupled shifted-difference estimates, one environment per
    replication, plus the telescoping self-check."""
    _min_reps(exp.replications)
    est, ses, counts, ncens = [], [], [], []
    for idx, m in enumerate(exp.m_values):
        tasks = [
            (
                EnvConfig(
                    cfg.dimension,
                    cfg.rate,
                    derive_seed(cfg.seed, _LBL_DIFF, idx, rep),
                    cfg.law,
                    cfg.cell_edge,
                    cfg.slab_height,
                ),
                exp.n,
                m,
                exp.delta,
            )
            for rep in range(exp.replications)
        ]
        pairs = pmap(_diff_worker, tasks, jobs)
        diffs = [a - b for a, b in pairs if not (math.isnan(a) or math.isnan(b))]
        cens = len(pairs) - len(diffs)
        if len(diffs) < 2:
            raise ConfigError(f"m={m}: too many censored runs ({cens})")
        mean = sum(diffs) / len(diffs)
        var = sum((v - mean) ** 2 for v in diffs) / (len(diffs) - 1)
        est.append(mean)
        ses.append(math.sqrt(var / len(diffs)))
        counts.append(len(diffs))
        ncens.append(cens)
    telescope = telescoping_identity(
        cfg, exp.n, exp.telescope_segments, min(exp.replications, 30), exp.delta, jobs
    )
    return DiffResult(
        m_values=tuple(exp.m_values),
        estimates=tuple(est),
        standard_errors=tuple(ses),
        counts=tuple(counts),
        censored=tuple(ncens),
        n=exp.n,
        epsilon=exp.epsilon,
        telescope=telescope,
    )


def _shift_worker(args) -> float:
    cfg, start, target, delta = args
    return passage_time(cfg, start, target, delta).time


def translation_samples(
    cfg: EnvConfig,
    n: float,
    m: float,
    replications: int,
    delta: float = 1e-3,
    jobs: int = 1,
) -> tuple[list[float], list[float]]:
    """Independent samples of T(n*e1, -m*e1) and of T(0, (n+m)*e1).

    Both target a span of n + m along the first axis; under translation
    invariance of the environment law the two samples share a distribution.
    """
    d = cfg.dimension
    pad = (0.0,) * (d - 1)

    def mk(tag: int, rep: int) -> EnvConfig:
        return EnvConfig(
            cfg.dimension,
            cfg.rate,
            derive_seed(cfg.seed, _LBL_SHIFT, tag, rep),
            cfg.law,
            cfg.cell_edge,
            cfg.slab_height,
        )

    tasks_a = [(mk(0, rep), (n,) + pad, (-m,) + pad, delta) for rep in range(replications)]
    tasks_b = [(mk(1, rep), (0.0,) + pad, (n + m,) + pad, delta) for rep in range(replications)]
    sa = [t for t in pmap(_shift_worker, tasks_a, jobs) if not math.isnan(t)]
    sb = [t for t in pmap(_shift_worker, tasks_b, jobs) if not math.isnan(t)]
    return sa, sb

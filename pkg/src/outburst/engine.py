"""Event-driven growth over the shared environment.

A run starts from typed seed balls. Marked points of the environment fire
``delay`` time units after their location first becomes infected; a firing
of a type-i location is kept with probability lambda_i / rate (decided by
the point's standing thinning uniform, identical across coupled runs) and
adds a ball of the point's radius. Infected points never change type.

Scheduling is lazy: spatial cells are activated when a ball first overlaps
them, and each active cell materializes (cell, slab) blocks only as far as
the loop's time frontier requires. A point whose location is infected at
materialization is scheduled; otherwise it is parked in its cell and
re-examined only when a new ball overlaps that cell. Points enter the
priority queue exactly once, when their infection time is known, so no
queue entry is ever stale.

Soundness of the lazy frontier: for any location x in cell C, the infection
time tau(x) is at least the cell's activation time, so a block with slab s
only contains firings at or after base(C) + s * slab_height. The loop never
pops an event at time t before every active cell's unmaterialized slabs
start at or after t.
"""

from __future__ import annotations

import heapq
import math
from array import array
from dataclasses import dataclass, field
from typing import Callable, Iterator, Sequence

from . import _kernels
from .env import EnvConfig
from .errors import ConfigError, ParameterError
from .geom import Ball, BallIndex, contains_point

Seed = tuple[Ball, int]
TYPE_TAGS = (1, 2)


@dataclass(frozen=True)
class GrowthBall:
    """One infected ball: a seed or a fired outburst."""

    center: tuple[float, ...]
    radius: float
    birth: float
    type_tag: int
    provenance: tuple
    redundant: bool = False


@dataclass(frozen=True)
class PendingEvent:
    """A materialized environment point awaiting its firing.

    ``tau`` and ``fire_time`` are None while the location is uninfected
    (the point is parked); once the location is covered they are fixed
    forever and the event sits in the queue.
    """

    location: tuple[float, ...]
    delay: float
    radius: float
    provenance: tuple
    tau: float | None = None
    fire_time: float | None = None
    type_tag: int | None = None


@dataclass(frozen=True)
class Budget:
    """Hard bounds making every run finite.

    ``max_time`` must be finite: the lazy frontier materializes environment
    blocks up to the earlier of the next event and ``max_time``, so an
    unbounded horizon over a dying configuration would never terminate.
    ``max_extent`` caps growth inside the seed bounding box inflated by
    that amount; a ball escaping it censors the run.
    """

    max_events: int = 2_000_000
    max_time: float = 1e4
    max_extent: float = math.inf

    def __post_init__(self):
        if self.max_events < 1:
            raise ParameterError("max_events must be at least 1")
        if not (math.isfinite(self.max_time) and self.max_time > 0.0):
            raise ParameterError(f"max_time must be positive and finite, got {self.max_time}")
        if not self.max_extent > 0.0:
            raise ParameterError("max_extent must be positive")


@dataclass(frozen=True)
class History:
    """Immutable record of one run."""

    dimension: int
    seeds: tuple[GrowthBall, ...]
    events: tuple[GrowthBall, ...]
    clock: float
    stop_reason: str
    censored: bool
    audit: dict[str, int] = field(compare=False)

    def balls(self) -> Iterator[GrowthBall]:
        yield from self.seeds
        yield from self.events


@dataclass(frozen=True)
class PointLabel:
    type_tag: int
    tau: float


def _prov_sort_key(prov: tuple):
    if prov and prov[0] == "seed":
        return (0,) + tuple(prov[1:])
    if prov and prov[0] == "o":
        return (1,) + tuple(prov[1:])
    return (1,) + tuple(prov)


def classify_point(history: History, x: Sequence[float], t: float) -> PointLabel | None:
    """First-cover label of location ``x`` at time ``t``.

    Returns None while no ball born at or before ``t`` contains ``x``;
    otherwise the type and birth of the earliest covering ball, ties broken
    by (type_tag, provenance order). The label is constant in ``t`` once
    set: infected points never change type.
    """
    best = None
    for b in history.balls():
        if b.birth > t:
            continue
        if contains_point(Ball(b.center, b.radius), x):
            key = (b.birth, b.type_tag, _prov_sort_key(b.provenance))
            if best is None or key < best[0]:
                best = (key, b)
    if best is None:
        return None
    b = best[1]
    return PointLabel(b.type_tag, b.birth)


class _Cell:
    """Per-cell lazy state: activation time, next slab, and parked points."""

    __slots__ = ("base", "next_slab", "xy", "delay", "radius", "thin", "slab", "ordinal")

    def __init__(self, base: float):
        self.base = base
        self.next_slab = 0
        self.xy = array("d")
        self.delay = array("d")
        self.radius = array("d")
        self.thin = array("d")
        self.slab = array("q")
        self.ordinal = array("q")


class Engine:
    """Mutable state of one run; use :func:`run` unless a stopping rule
    needs incremental access to the growing ball index."""

    def __init__(
        self,
        cfg: EnvConfig,
        seeds: Sequence[Seed],
        lambda1: float,
        lambda2: float,
        budget: Budget | None = None,
        point_source: Callable | None = None,
        redundancy_delta: float | None = None,
    ):
        if budget is None:
            budget = Budget()
        if not seeds:
            raise ConfigError("at least one seed ball is required")
        for lam, name in ((lambda1, "lambda1"), (lambda2, "lambda2")):
            if not (math.isfinite(lam) and lam > 0.0):
                raise ConfigError(f"{name} must be positive and finite, got {lam}")
        if max(lambda1, lambda2) > cfg.rate * (1.0 + 1e-12):
            raise ConfigError(
                f"per-type intensities ({lambda1}, {lambda2}) must not exceed "
                f"the environment rate {cfg.rate}"
            )
        d = cfg.dimension
        norm: list[tuple[Ball, int, int]] = []
        for i, (ball, tag) in enumerate(seeds):
            if tag not in TYPE_TAGS:
                raise ConfigError(f"seed type tag must be 1 or 2, got {tag}")
            if ball.dimension != d:
                raise ConfigError("seed ball dimension must match the environment")
            norm.append((ball, tag, i))
        norm.sort(key=lambda s: (s[1], s[2]))
        for a, ta, _ in norm:
            for b, tb, _ in norm:
                if ta < tb and _open_balls_meet(a, b):
                    raise ConfigError(
                        "seed balls of different types must have disjoint interiors"
                    )

        self.cfg = cfg
        self.budget = budget
        self.dimension = d
        self.lambda1 = lambda1
        self.lambda2 = lambda2
        self._ratio1 = lambda1 / cfg.rate
        self._ratio2 = lambda2 / cfg.rate
        self._delta_red = cfg.law.bound * 1e-3 if redundancy_delta is None else redundancy_delta
        if not math.isfinite(self._delta_red):
            self._delta_red = 1e-3

        self.index = BallIndex(d, cfg.cell_edge)
        self.provenances: list[tuple] = []
        self.redundant: list[bool] = []
        self.n_seeds = 0
        self.n_events = 0
        self.clock = 0.0
        self.last_id = -1
        self.audit = {
            "events_fired": 0,
            "events_discarded": 0,
            "events_redundant": 0,
            "points_generated": 0,
            "points_parked": 0,
            "blocks_materialized": 0,
            "cells_activated": 0,
        }

        lo = [math.inf] * d
        hi = [-math.inf] * d
        for ball, tag, i in norm:
            bid = self.index.append(ball.center, ball.radius, 0.0, tag)
            self.provenances.append(("seed", i))
            self.redundant.append(False)
            self.n_seeds += 1
            self.last_id = bid
            blo, bhi = ball.bbox()
            for k in range(d):
                lo[k] = min(lo[k], blo[k])
                hi[k] = max(hi[k], bhi[k])
        if math.isfinite(budget.max_extent):
            self.cap_lo = tuple(v - budget.max_extent for v in lo)
            self.cap_hi = tuple(v + budget.max_extent for v in hi)
        else:
            self.cap_lo = self.cap_hi = None

        if point_source is None:
            law = cfg.law

            def point_source(cell, slab):
                return _kernels.cell_points(
                    cfg.seed,
                    cell,
                    slab,
                    cfg.mean_per_block,
                    cfg.cell_edge,
                    cfg.slab_height,
                    law.kind,
                    law.p1,
                    law.p2,
                )

        self._points = point_source
        self._heap: list = []
        self._horizon: list = []
        self.cells: dict[tuple[int, ...], _Cell] = {}
        for ball, _, _ in norm:
            blo, bhi = ball.bbox()
            for ck in self.index.cell_range(blo, bhi):
                self._activate(ck, 0.0)

    # -- lazy materialization ------------------------------------------------

    def _activate(self, cell_key: tuple[int, ...], t: float):
        if cell_key in self.cells:
            return
        cell = _Cell(t)
        self.cells[cell_key] = cell
        self.audit["cells_activated"] += 1
        heapq.heappush(self._horizon, (t, cell_key))

    def _materialize(self, cell_key: tuple[int, ...], cell: _Cell):
        slab = cell.next_slab
        cell.next_slab = slab + 1
        coords, delays, radii, thins = self._points(cell_key, slab)
        d = self.dimension
        self.audit["blocks_materialized"] += 1
        n = len(delays)
        self.audit["points_generated"] += n
        for j in range(n):
            loc = tuple(coords[j * d : (j + 1) * d])
            bi = self.index.first_cover(loc)
            if bi >= 0:
                tau = self.index.births[bi]
                fire = tau + delays[j]
                prov = cell_key + (slab, j)
                heapq.heappush(
                    self._heap,
                    (fire, self.index.types[bi], prov, loc, radii[j], thins[j], tau),
                )
            else:
                cell.xy.extend(loc)
                cell.delay.append(delays[j])
                cell.radius.append(radii[j])
                cell.thin.append(thins[j])
                cell.slab.append(slab)
                cell.ordinal.append(j)
                self.audit["points_parked"] += 1
        heapq.heappush(
            self._horizon,
            (cell.base + cell.next_slab * self.cfg.slab_height, cell_key),
        )

    def _advance_frontier(self):
        """Materialize blocks until no unseen point can fire before the
        earlier of the next queued event and the time budget."""
        while True:
            t_next = self._heap[0][0] if self._heap else math.inf
            t_req = t_next if t_next < self.budget.max_time else self.budget.max_time
            if not self._horizon or self._horizon[0][0] >= t_req:
                return
            _, cell_key = heapq.heappop(self._horizon)
            self._materialize(cell_key, self.cells[cell_key])

    # -- event processing ----------------------------------------------------

    def _append_ball(self, loc, radius, fire, type_tag, prov) -> int:
        d = self.dimension
        lo = tuple(c - radius for c in loc)
        hi = tuple(c + radius for c in loc)
        cands = self.index.candidates_in_box(lo, hi)
        red = (
            _kernels.find_uncovered_core(
                lo,
                hi,
                loc,
                radius,
                cands,
                self.index.centers,
                self.index.radii,
                self._delta_red,
                d,
            )
            is None
        )
        bid = self.index.append(loc, radius, fire, type_tag)
        self.provenances.append(prov)
        self.redundant.append(red)
        if red:
            self.audit["events_redundant"] += 1
        self.n_events += 1
        self.audit["events_fired"] += 1
        self.last_id = bid
        for ck in self.index.cell_range(lo, hi):
            cell = self.cells.get(ck)
            if cell is None:
                self._activate(ck, fire)
                continue
            if len(cell.delay) == 0:
                continue
            hits = _kernels.scan_hits(loc, radius, cell.xy, d)
            for pos in reversed(hits):
                p_loc = tuple(cell.xy[pos * d : (pos + 1) * d])
                p_prov = ck + (cell.slab[pos], cell.ordinal[pos])
                heapq.heappush(
                    self._heap,
                    (
                        fire + cell.delay[pos],
                        type_tag,
                        p_prov,
                        p_loc,
                        cell.radius[pos],
                        cell.thin[pos],
                        fire,
                    ),
                )
                _swap_remove(cell, pos, d)
        return bid

    def _within_cap(self, loc, radius) -> bool:
        if self.cap_lo is None:
            return True
        for k in range(self.dimension):
            if loc[k] - radius < self.cap_lo[k] or loc[k] + radius > self.cap_hi[k]:
                return False
        return True

    def run(self, stop: Callable[["Engine"], bool] | None = None) -> History:
        reason = None
        censored = False
        if stop is not None and stop(self):
            reason = "stopped"
        while reason is None:
            if self.n_events >= self.budget.max_events:
                reason, censored = "max_events", True
                break
            self._advance_frontier()
            if not self._heap or self._heap[0][0] > self.budget.max_time:
                reason, censored = "max_time", True
                self.clock = self.budget.max_time
                break
            fire, type_tag, prov, loc, radius, thin, _tau = heapq.heappop(self._heap)
            self.clock = fire
            ratio = self._ratio1 if type_tag == 1 else self._ratio2
            if thin > ratio:
                self.audit["events_discarded"] += 1
                continue
            if not self._within_cap(loc, radius):
                reason, censored = "spatial_cap", True
                break
            self._append_ball(loc, radius, fire, type_tag, prov)
            if stop is not None and stop(self):
                reason = "stopped"
        return self._history(reason, censored)

    def _history(self, reason: str, censored: bool) -> History:
        d = self.dimension
        seeds = []
        events = []
        for bid in range(len(self.index)):
            g = GrowthBall(
                center=tuple(self.index.centers[bid * d : (bid + 1) * d]),
                radius=self.index.radii[bid],
                birth=self.index.births[bid],
                type_tag=self.index.types[bid],
                provenance=self.provenances[bid],
                redundant=self.redundant[bid],
            )
            (seeds if bid < self.n_seeds else events).append(g)
        return History(
            dimension=d,
            seeds=tuple(seeds),
            events=tuple(events),
            clock=self.clock,
            stop_reason=reason,
            censored=censored,
            audit=dict(self.audit),
        )

    def pending_events(self) -> tuple[PendingEvent, ...]:
        """Snapshot of queued and parked points (diagnostics only)."""
        out = []
        for fire, type_tag, prov, loc, radius, _thin, tau in sorted(self._heap):
            out.append(PendingEvent(loc, fire - tau, radius, prov, tau, fire, type_tag))
        d = self.dimension
        for ck, cell in self.cells.items():
            for pos in range(len(cell.delay)):
                out.append(
                    PendingEvent(
                        tuple(cell.xy[pos * d : (pos + 1) * d]),
                        cell.delay[pos],
                        cell.radius[pos],
                        ck + (cell.slab[pos], cell.ordinal[pos]),
                    )
                )
        return tuple(out)


def _swap_remove(cell: _Cell, pos: int, d: int):
    last = len(cell.delay) - 1
    if pos != last:
        for k in range(d):
            cell.xy[pos * d + k] = cell.xy[last * d + k]
        cell.delay[pos] = cell.delay[last]
        cell.radius[pos] = cell.radius[last]
        cell.thin[pos] = cell.thin[last]
        cell.slab[pos] = cell.slab[last]
        cell.ordinal[pos] = cell.ordinal[last]
    del cell.xy[last * d : last * d + d]
    cell.delay.pop()
    cell.radius.pop()
    cell.thin.pop()
    cell.slab.pop()
    cell.ordinal.pop()


def _open_balls_meet(a: Ball, b: Ball) -> bool:
    s = 0.0
    for x, y in zip(a.center, b.center):
        dx = x - y
        s += dx * dx
    reach = a.radius + b.radius
    return s < reach * reach


def run(
    cfg: EnvConfig,
    seeds: Sequence[Seed],
    lambda1: float,
    lambda2: float,
    stop: Callable[[Engine], bool] | None = None,
    budget: Budget | None = None,
    point_source: Callable | None = None,
) -> History:
    """Run the growth process and return its History.

    ``seeds`` is a sequence of (Ball, type_tag) pairs with type tags in
    {1, 2}; seeds of different types must have disjoint interiors. ``stop``
    is called once before the first event and after every appended ball
    with the live Engine; returning True ends the run uncensored.
    """
    eng = Engine(cfg, seeds, lambda1, lambda2, budget, point_source)
    return eng.run(stop)

"""Ball geometry, certified coverage queries, and a cell-bucketed ball index.

All membership tests use squared distances in plain double arithmetic, so
verdicts on individual points are exact up to IEEE rounding of the distance
evaluation. Coverage of a region is decided by hierarchical subdivision:
a box is discarded once it lies inside a single ball (farthest-corner
test), produces an immediate certified witness once it meets no ball at
all, and otherwise splits until its longest edge is at most ``delta``.
Consequences, stated once here and relied on everywhere: a Covered verdict
(None) has no false positives, and coverage may be under-reported only
within a delta-neighborhood of ball boundaries.
"""

from __future__ import annotations

import itertools
import math
from array import array
from dataclasses import dataclass
from typing import Iterable, Sequence

from . import _kernels
from .errors import ParameterError
from .rng import TAG_VOLUME, UnitStream, make_key


@dataclass(frozen=True)
class Ball:
    """Closed ball given by center coordinates and a positive radius."""

    center: tuple[float, ...]
    radius: float

    def __post_init__(self):
        if not self.center:
            raise ParameterError("ball center must have at least one coordinate")
        if not all(math.isfinite(c) for c in self.center):
            raise ParameterError("ball center must be finite")
        if not (math.isfinite(self.radius) and self.radius > 0.0):
            raise ParameterError(f"ball radius must be positive and finite, got {self.radius}")
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def dimension(self) -> int:
        return len(self.center)

    def bbox(self) -> tuple[tuple[float, ...], tuple[float, ...]]:
        r = self.radius
        return (
            tuple(c - r for c in self.center),
            tuple(c + r for c in self.center),
        )


@dataclass(frozen=True)
class AxisBox:
    """Axis-aligned box [low, high], possibly degenerate in some axes."""

    low: tuple[float, ...]
    high: tuple[float, ...]

    def __post_init__(self):
        if len(self.low) != len(self.high) or not self.low:
            raise ParameterError("box corners must be nonempty and of equal dimension")
        object.__setattr__(self, "low", tuple(float(v) for v in self.low))
        object.__setattr__(self, "high", tuple(float(v) for v in self.high))
        for a, b in zip(self.low, self.high):
            if not (math.isfinite(a) and math.isfinite(b) and a <= b):
                raise ParameterError("box must satisfy low <= high with finite corners")

    @property
    def dimension(self) -> int:
        return len(self.low)

    def contains(self, x: Sequence[float]) -> bool:
        return all(a <= v <= b for a, v, b in zip(self.low, x, self.high))

    @classmethod
    def around(cls, ball: Ball) -> "AxisBox":
        lo, hi = ball.bbox()
        return cls(lo, hi)


def contains_point(ball: Ball, x: Sequence[float]) -> bool:
    """Closed-ball membership by squared distance."""
    s = 0.0
    for c, v in zip(ball.center, x):
        dx = v - c
        s += dx * dx
    return s <= ball.radius * ball.radius


@dataclass(frozen=True)
class Witness:
    """A point of the search domain that could not be certified covered.

    ``certified`` is True when the point itself lies in no region ball (an
    exact non-coverage proof); False when it is merely the representative
    of a leaf box that the subdivision could not settle at resolution delta.
    """

    point: tuple[float, ...]
    certified: bool


def _pack_balls(balls: Iterable[Ball], d: int):
    centers = array("d")
    radii = array("d")
    n = 0
    for b in balls:
        if b.dimension != d:
            raise ParameterError("region balls must match the search dimension")
        centers.extend(b.center)
        radii.append(b.radius)
        n += 1
    return centers, radii, n


def _ball_meets_box(ball: Ball, low, high) -> bool:
    s = 0.0
    for k, c in enumerate(ball.center):
        if c < low[k]:
            dx = low[k] - c
        elif c > high[k]:
            dx = c - high[k]
        else:
            dx = 0.0
        s += dx * dx
    return s <= ball.radius * ball.radius


def _balls_meet(a: Ball, b: Ball) -> bool:
    s = 0.0
    for x, y in zip(a.center, b.center):
        dx = x - y
        s += dx * dx
    reach = a.radius + b.radius
    return s <= reach * reach


def find_uncovered(
    box: AxisBox,
    region: Sequence[Ball],
    delta: float = 1e-3,
    mask: Ball | None = None,
) -> Witness | None:
    """Search ``box`` (intersected with ``mask`` if given) for a point not
    covered by the union of ``region``.

    Returns None when the domain is covered; an empty domain counts as
    covered. Candidate balls that cannot meet the domain are dropped before
    the subdivision, which does not affect the verdict.
    """
    if delta <= 0.0 or not math.isfinite(delta):
        raise ParameterError(f"delta must be positive and finite, got {delta}")
    d = box.dimension
    if mask is not None and mask.dimension != d:
        raise ParameterError("mask dimension must match the box")
    for b in region:
        if b.dimension != d:
            raise ParameterError("region balls must match the search dimension")
    cands = [b for b in region if _ball_meets_box(b, box.low, box.high)]
    if mask is not None:
        cands = [b for b in cands if _balls_meet(b, mask)]
        # One ball swallowing the whole mask settles the search exactly,
        # without delta-resolution ambiguity at the domain boundary.
        for b in cands:
            if math.dist(b.center, mask.center) + mask.radius <= b.radius:
                return None
    else:
        for b in cands:
            far = 0.0
            for k in range(d):
                a = abs(b.center[k] - box.low[k])
                c = abs(box.high[k] - b.center[k])
                dx = a if a > c else c
                far += dx * dx
            if far <= b.radius * b.radius:
                return None
    centers, radii, n = _pack_balls(cands, d)
    res = _kernels.find_uncovered_core(
        box.low,
        box.high,
        None if mask is None else mask.center,
        0.0 if mask is None else mask.radius,
        range(n),
        centers,
        radii,
        delta,
        d,
    )
    if res is None:
        return None
    point, certified = res
    return Witness(point, certified)


def ball_fully_covered(
    target: Ball,
    region: Sequence[Ball],
    delta: float = 1e-3,
) -> tuple[bool, Witness | None]:
    """Whether the closed ``target`` ball is covered by the union of ``region``.

    Returns ``(True, None)`` or ``(False, witness)``.
    """
    lo, hi = target.bbox()
    w = find_uncovered(AxisBox(lo, hi), region, delta, mask=target)
    return (w is None), w


def ball_volume(dimension: int, radius: float) -> float:
    """Lebesgue volume of a ball."""
    d = dimension
    return math.pi ** (d / 2.0) / math.gamma(d / 2.0 + 1.0) * radius**d


@dataclass(frozen=True)
class VolumeEstimate:
    value: float
    standard_error: float
    samples: int


def volume_estimate(region: Sequence[Ball], samples: int, seed: int) -> VolumeEstimate:
    """Unbiased Monte Carlo estimate of the volume of a union of balls.

    Samples a ball with probability proportional to its volume, a uniform
    point inside it, and weights by the reciprocal of the number of balls
    containing the point. Intended as a diagnostic, not a hot path.
    """
    if samples < 2:
        raise ParameterError("volume_estimate needs at least 2 samples")
    balls = list(region)
    if not balls:
        return VolumeEstimate(0.0, 0.0, samples)
    d = balls[0].dimension
    vols = [ball_volume(d, b.radius) for b in balls]
    total = sum(vols)
    cum = list(itertools.accumulate(vols))
    stream = UnitStream(make_key(seed, TAG_VOLUME))
    acc = 0.0
    acc2 = 0.0
    for _ in range(samples):
        pick = stream.unit() * total
        j = 0
        while j < len(cum) - 1 and cum[j] < pick:
            j += 1
        x = stream.point_in_ball(balls[j].center, balls[j].radius)
        k = 0
        for b in balls:
            if contains_point(b, x):
                k += 1
        w = total / k
        acc += w
        acc2 += w * w
    mean = acc / samples
    var = (acc2 - samples * mean * mean) / (samples - 1)
    if var < 0.0:
        var = 0.0
    return VolumeEstimate(mean, math.sqrt(var / samples), samples)


class BallIndex:
    """Append-only store of balls with cell-hashed buckets.

    Balls are kept in flat parallel arrays (suitable for both kernel
    backends); each ball id is registered in the bucket of every grid cell
    its bounding box overlaps, so the bucket of a point's cell is a superset
    of the balls containing the point, in ascending (birth) order.
    """

    __slots__ = ("dimension", "cell_edge", "centers", "radii", "births", "types", "buckets")

    def __init__(self, dimension: int, cell_edge: float):
        if dimension < 1:
            raise ParameterError("dimension must be at least 1")
        if not (cell_edge > 0.0 and math.isfinite(cell_edge)):
            raise ParameterError("cell_edge must be positive and finite")
        self.dimension = dimension
        self.cell_edge = float(cell_edge)
        self.centers = array("d")
        self.radii = array("d")
        self.births = array("d")
        self.types = array("b")
        self.buckets: dict[tuple[int, ...], array] = {}

    def __len__(self) -> int:
        return len(self.radii)

    def cell_of(self, x: Sequence[float]) -> tuple[int, ...]:
        e = self.cell_edge
        return tuple(math.floor(v / e) for v in x)

    def cell_range(self, lo: Sequence[float], hi: Sequence[float]):
        """Iterator over integer cells whose box overlaps [lo, hi]."""
        e = self.cell_edge
        spans = [
            range(math.floor(lo[k] / e), math.floor(hi[k] / e) + 1)
            for k in range(self.dimension)
        ]
        return itertools.product(*spans)

    def append(self, center: Sequence[float], radius: float, birth: float, type_tag: int) -> int:
        bid = len(self.radii)
        self.centers.extend(center)
        self.radii.append(radius)
        self.births.append(birth)
        self.types.append(type_tag)
        r = radius
        lo = [c - r for c in center]
        hi = [c + r for c in center]
        for cell in self.cell_range(lo, hi):
            bucket = self.buckets.get(cell)
            if bucket is None:
                bucket = array("q")
                self.buckets[cell] = bucket
            bucket.append(bid)
        return bid

    def first_cover(self, x: Sequence[float]) -> int:
        """Id of the earliest-appended ball containing ``x``, or -1."""
        bucket = self.buckets.get(self.cell_of(x))
        if bucket is None:
            return -1
        return _kernels.first_cover_hit(x, bucket, self.centers, self.radii, self.dimension)

    def candidates_in_box(self, lo: Sequence[float], hi: Sequence[float], exclude: int = -1):
        """Sorted unique ball ids whose buckets overlap the box [lo, hi]."""
        seen: set[int] = set()
        for cell in self.cell_range(lo, hi):
            bucket = self.buckets.get(cell)
            if bucket is not None:
                seen.update(bucket)
        if exclude >= 0:
            seen.discard(exclude)
        out = array("q", sorted(seen))
        return out

    def ball(self, bid: int) -> Ball:
        d = self.dimension
        base = bid * d
        return Ball(tuple(self.centers[base : base + d]), self.radii[bid])

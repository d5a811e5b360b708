"""Shared random environment: radius laws and the marked space-time point
process read in (cell, slab) blocks.

Space is tiled by cubes of edge ``cell_edge`` and the relative-time axis by
slabs of height ``slab_height``. The marked points of each block are a pure
function of (seed, cell, slab), so independent consumers can materialize
any block on demand, in any order, and always see the same points. This is
what makes runs started from different initial balls pathwise comparable:
they literally share the environment.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from . import _kernels
from .errors import ParameterError
from .rng import (
    LAW_DIRAC,
    LAW_EXPONENTIAL,
    LAW_TRUNC_EXPONENTIAL,
    LAW_UNIFORM,
    sample_radius,
)

_FAMILY_NAMES = {
    LAW_DIRAC: "dirac",
    LAW_UNIFORM: "uniform",
    LAW_EXPONENTIAL: "exponential",
    LAW_TRUNC_EXPONENTIAL: "truncated_exponential",
}


@dataclass(frozen=True)
class RadiusLaw:
    """Distribution of outburst radii.

    Families (all strictly positive, all with every exponential moment in a
    neighborhood of zero finite):

    - dirac(r): point mass at r.
    - uniform_half_open(a, b): uniform on the interval (a, b].
    - exponential(beta): rate-beta exponential; unbounded support.
    - truncated_exponential(beta, cap): rate-beta exponential conditioned
      on values at most cap.
    """

    kind: int
    p1: float
    p2: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "p1", float(self.p1))
        object.__setattr__(self, "p2", float(self.p2))
        k, a, b = self.kind, self.p1, self.p2
        if k == LAW_DIRAC:
            if not (math.isfinite(a) and a > 0.0):
                raise ParameterError(f"dirac radius must be positive, got {a}")
        elif k == LAW_UNIFORM:
            if not (math.isfinite(a) and a >= 0.0):
                raise ParameterError(f"uniform lower endpoint must be >= 0, got {a}")
            if not (math.isfinite(b) and b > a):
                raise ParameterError(f"uniform upper endpoint must exceed {a}, got {b}")
        elif k == LAW_EXPONENTIAL:
            if not (math.isfinite(a) and a > 0.0):
                raise ParameterError(f"exponential rate must be positive, got {a}")
        elif k == LAW_TRUNC_EXPONENTIAL:
            if not (math.isfinite(a) and a > 0.0):
                raise ParameterError(f"truncation rate must be positive, got {a}")
            if not (math.isfinite(b) and b > 0.0):
                raise ParameterError(f"truncation cap must be positive, got {b}")
        else:
            raise ParameterError(f"unknown radius-law kind {k}")

    @classmethod
    def dirac(cls, r: float) -> "RadiusLaw":
        return cls(LAW_DIRAC, r)

    @classmethod
    def uniform_half_open(cls, a: float, b: float) -> "RadiusLaw":
        return cls(LAW_UNIFORM, a, b)

    @classmethod
    def exponential(cls, beta: float) -> "RadiusLaw":
        return cls(LAW_EXPONENTIAL, beta)

    @classmethod
    def truncated_exponential(cls, beta: float, cap: float) -> "RadiusLaw":
        return cls(LAW_TRUNC_EXPONENTIAL, beta, cap)

    @property
    def family(self) -> str:
        return _FAMILY_NAMES[self.kind]

    @property
    def bound(self) -> float:
        """Supremum of the support (inf for the exponential family)."""
        if self.kind == LAW_DIRAC:
            return self.p1
        if self.kind == LAW_UNIFORM:
            return self.p2
        if self.kind == LAW_EXPONENTIAL:
            return math.inf
        return self.p2

    @property
    def small_support(self) -> bool:
        """True when every neighborhood of zero carries positive mass."""
        if self.kind == LAW_UNIFORM:
            return self.p1 == 0.0
        return self.kind in (LAW_EXPONENTIAL, LAW_TRUNC_EXPONENTIAL)

    @property
    def mean(self) -> float:
        if self.kind == LAW_DIRAC:
            return self.p1
        if self.kind == LAW_UNIFORM:
            return 0.5 * (self.p1 + self.p2)
        if self.kind == LAW_EXPONENTIAL:
            return 1.0 / self.p1
        beta, cap = self.p1, self.p2
        mass = -math.expm1(-beta * cap)
        return 1.0 / beta - cap * math.exp(-beta * cap) / mass

    def sample_at(self, u: float) -> float:
        """Inverse-CDF transform of a unit uniform in (0, 1)."""
        return sample_radius(self.kind, self.p1, self.p2, u)

    def cdf(self, r: float) -> float:
        if r <= 0.0:
            return 0.0
        if self.kind == LAW_DIRAC:
            return 1.0 if r >= self.p1 else 0.0
        if self.kind == LAW_UNIFORM:
            if r <= self.p1:
                return 0.0
            if r >= self.p2:
                return 1.0
            return (r - self.p1) / (self.p2 - self.p1)
        if self.kind == LAW_EXPONENTIAL:
            return -math.expm1(-self.p1 * r)
        beta, cap = self.p1, self.p2
        if r >= cap:
            return 1.0
        return math.expm1(-beta * r) / math.expm1(-beta * cap)


@dataclass(frozen=True)
class LawReport:
    family: str
    exp_moment_finite: bool
    small_support: bool
    radius_bound: float


def validate_law(law: RadiusLaw) -> LawReport:
    """Report the structural properties the growth theory relies on.

    Every supported family has a finite exponential moment in a
    neighborhood of zero (bounded support, or exponential tails), which is
    the condition guaranteeing a deterministic linear growth rate.
    """
    return LawReport(
        family=law.family,
        exp_moment_finite=True,
        small_support=law.small_support,
        radius_bound=law.bound,
    )


@dataclass(frozen=True)
class EnvConfig:
    """Parameters of the shared environment.

    ``rate`` is the driving intensity per unit volume of space and relative
    time; per-type intensities are configured on runs and realized by
    thinning, so they must not exceed ``rate``.
    """

    dimension: int
    rate: float
    seed: int
    law: RadiusLaw
    cell_edge: float = 1.0
    slab_height: float = 1.0

    def __post_init__(self):
        if not isinstance(self.dimension, int) or self.dimension < 1:
            raise ParameterError(f"dimension must be a positive integer, got {self.dimension}")
        if self.dimension > _kernels.MAX_DIMENSION:
            raise ParameterError(
                f"dimension {self.dimension} exceeds the active kernel limit "
                f"{_kernels.MAX_DIMENSION}; set OUTBURST_KERNELS=py for high dimensions"
            )
        if not (math.isfinite(self.rate) and self.rate > 0.0):
            raise ParameterError(f"rate must be positive and finite, got {self.rate}")
        if not isinstance(self.seed, int):
            raise ParameterError("seed must be an integer")
        if not (math.isfinite(self.cell_edge) and self.cell_edge > 0.0):
            raise ParameterError(f"cell_edge must be positive, got {self.cell_edge}")
        if not (math.isfinite(self.slab_height) and self.slab_height > 0.0):
            raise ParameterError(f"slab_height must be positive, got {self.slab_height}")
        if not isinstance(self.law, RadiusLaw):
            raise ParameterError("law must be a RadiusLaw")

    @property
    def mean_per_block(self) -> float:
        """Expected number of points per (cell, slab) block."""
        return self.rate * self.cell_edge**self.dimension * self.slab_height


@dataclass(frozen=True)
class MarkedPoint:
    """One point of the environment.

    ``delay`` is relative time: the outburst fires that long after the
    location first becomes infected. ``thin`` is the point's standing
    uniform used for per-type intensity thinning, fixed here so that every
    run sharing the environment makes the same keep/discard decision.
    ``key`` is (cell..., slab, ordinal) and identifies the point globally.
    """

    location: tuple[float, ...]
    delay: float
    radius: float
    thin: float
    key: tuple[int, ...] = field(repr=False)


def points_in(cfg: EnvConfig, cell: tuple[int, ...], slab: int) -> tuple[MarkedPoint, ...]:
    """Materialize the marked points of one (cell, slab) block.

    Pure in (cfg.seed, cell, slab): repeated calls, in any order, from any
    process, return identical points.
    """
    if len(cell) != cfg.dimension:
        raise ParameterError(f"cell must have {cfg.dimension} coordinates, got {len(cell)}")
    if slab < 0:
        raise ParameterError(f"slab index must be nonnegative, got {slab}")
    cell = tuple(int(c) for c in cell)
    coords, delays, radii, thins = _kernels.cell_points(
        cfg.seed,
        cell,
        int(slab),
        cfg.mean_per_block,
        cfg.cell_edge,
        cfg.slab_height,
        cfg.law.kind,
        cfg.law.p1,
        cfg.law.p2,
    )
    d = cfg.dimension
    out = []
    for j in range(len(delays)):
        out.append(
            MarkedPoint(
                location=tuple(coords[j * d : (j + 1) * d]),
                delay=delays[j],
                radius=radii[j],
                thin=thins[j],
                key=cell + (int(slab), j),
            )
        )
    return tuple(out)

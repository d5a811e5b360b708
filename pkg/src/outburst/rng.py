"""Counter-based random primitives and distribution transforms.

Every random quantity in this package is a pure function of a 64-bit stream
key and a counter. Keys are built by absorbing integer components (seed,
cell indices, slab index, purpose tag) into a mixing chain, so distinct
components yield statistically independent streams and any consumer can be
replayed in isolation, in any order, on any backend.

The mixing function is the splitmix64 finalizer; stream values are produced
by mixing ``key + (i + 1) * GOLDEN``, which is the splitmix64 sequence
started at the key. The pure-Python code here masks to 64 bits explicitly;
the compiled kernels perform the same arithmetic on native unsigned words
and are required (and tested) to agree bit for bit.
"""

from __future__ import annotations

import math

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_INIT = 0x243F6A8885A308D3

# Purpose tags keeping unrelated streams for the same (seed, cell, slab)
# apart. Values are arbitrary distinct constants.
TAG_COUNT = 0x9B97F4A7C15DA1CE
TAG_ATTR = 0x5851F42D4C957F2D
TAG_DERIVE = 0xD1342543DE82EF95
TAG_PROBE = 0xAF251AF3B0F025B5
TAG_VOLUME = 0xB564EF22EC7AECE5
TAG_ORACLE = 0xF7C2EBC08F67F2B5
TAG_SCATTER = 0xC28FA16A64ABF96D


def mix64(z: int) -> int:
    """Avalanche a 64-bit value (splitmix64 finalizer)."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def to_u64(v: int) -> int:
    """Two's-complement view of an integer as an unsigned 64-bit word."""
    return v & MASK64


def make_key(*parts: int) -> int:
    """Build a stream key by absorbing integer parts into a mixing chain."""
    h = _INIT
    for p in parts:
        h = mix64(h ^ to_u64(p))
    return h


def stream_u64(key: int, index: int) -> int:
    return mix64((key + (index + 1) * GOLDEN) & MASK64)


def stream_unit(key: int, index: int) -> float:
    """Value ``index`` of stream ``key`` as a float in the open interval (0, 1)."""
    return ((stream_u64(key, index) >> 11) + 0.5) * 2.0**-53


def derive_seed(seed: int, *parts: int) -> int:
    """Child seed for a replication or sub-experiment, decorrelated from others."""
    return make_key(seed, TAG_DERIVE, *parts)


def poisson_count(key: int, mean: float) -> int:
    """Poisson sample via Knuth's product method on stream ``key``.

    Exact for any mean, with cost linear in the result; intended for the
    small per-cell means used by the point process (typically around 1).
    """
    limit = math.exp(-mean)
    n = 0
    p = 1.0
    while True:
        p *= stream_unit(key, n)
        n += 1
        if p <= limit:
            return n - 1


# Radius-law family codes shared with the kernels.
LAW_DIRAC = 0
LAW_UNIFORM = 1
LAW_EXPONENTIAL = 2
LAW_TRUNC_EXPONENTIAL = 3


def sample_radius(kind: int, p1: float, p2: float, u: float) -> float:
    """Inverse-CDF transform of a unit uniform into an outburst radius.

    ``kind`` selects the family; every family consumes exactly one uniform
    slot (the point-mass family ignores its value) so the per-point stream
    layout is identical across families.
    """
    if kind == LAW_DIRAC:
        return p1
    if kind == LAW_UNIFORM:
        return p1 + (p2 - p1) * u
    if kind == LAW_EXPONENTIAL:
        return -math.log(u) / p1
    if kind == LAW_TRUNC_EXPONENTIAL:
        return -math.log1p(-u * -math.expm1(-p1 * p2)) / p1
    raise ValueError(f"unknown radius-law kind {kind}")


class UnitStream:
    """Sequential reader over one keyed stream.

    Used by consumers that draw a variable number of values (the rejection
    oracle, probe sampling, volume estimation). Engine point generation does
    not use this class; it addresses fixed per-point offsets directly.
    """

    __slots__ = ("key", "_i")

    def __init__(self, key: int):
        self.key = key
        self._i = 0

    def u64(self) -> int:
        v = stream_u64(self.key, self._i)
        self._i += 1
        return v

    def unit(self) -> float:
        v = stream_unit(self.key, self._i)
        self._i += 1
        return v

    def uniform(self, low: float, high: float) -> float:
        return low + (high - low) * self.unit()

    def exponential(self, rate: float) -> float:
        return -math.log(self.unit()) / rate

    def index(self, n: int) -> int:
        """Uniform integer in [0, n). Bias is below 2**-53 for practical n."""
        v = int(self.unit() * n)
        return n - 1 if v >= n else v

    def point_in_ball(self, center: tuple[float, ...], radius: float) -> tuple[float, ...]:
        """Uniform point in a closed ball, by rejection from the bounding cube."""
        d = len(center)
        while True:
            q = [2.0 * self.unit() - 1.0 for _ in range(d)]
            if sum(c * c for c in q) <= 1.0:
                return tuple(center[k] + radius * q[k] for k in range(d))

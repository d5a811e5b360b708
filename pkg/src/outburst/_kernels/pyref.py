"""Pure-Python reference kernels.

The compiled module ``_fast`` transliterates these functions statement by
statement; any change here must be mirrored there. Floating arithmetic is
written as explicit scalar operations in a fixed order so both backends
round identically.
"""

from __future__ import annotations

import math

from ..rng import (
    GOLDEN,
    MASK64,
    TAG_ATTR,
    TAG_COUNT,
    mix64,
    sample_radius,
    to_u64,
)

BACKEND = "py"
# Kept equal to the compiled backend's stack-buffer limit so a config is
# valid or invalid independently of which backend got selected.
MAX_DIMENSION = 16


def cell_points(
    seed: int,
    cell: tuple[int, ...],
    slab: int,
    mean: float,
    cell_edge: float,
    slab_height: float,
    law_kind: int,
    p1: float,
    p2: float,
):
    """Materialize the marked points of one (cell, slab) block.

    Returns four parallel lists: flat location coordinates (length n*d),
    delays, radii, and thinning values. A pure function of the arguments;
    the Poisson count and the per-ordinal attributes live on separate
    sub-streams so the count can consume a variable number of draws without
    shifting attribute offsets.
    """
    d = len(cell)
    h = 0x243F6A8885A308D3
    h = mix64(h ^ to_u64(seed))
    for c in cell:
        h = mix64(h ^ to_u64(c))
    h = mix64(h ^ to_u64(slab))
    key_count = mix64(h ^ TAG_COUNT)
    key_attr = mix64(h ^ TAG_ATTR)

    limit = math.exp(-mean)
    n = 0
    p = 1.0
    while True:
        u = ((mix64((key_count + (n + 1) * GOLDEN) & MASK64) >> 11) + 0.5) * 2.0**-53
        p *= u
        n += 1
        if p <= limit:
            break
    n -= 1

    stride = d + 3
    coords: list[float] = []
    delays: list[float] = []
    radii: list[float] = []
    thins: list[float] = []
    for j in range(n):
        off = j * stride
        for k in range(d):
            u = ((mix64((key_attr + (off + k + 1) * GOLDEN) & MASK64) >> 11) + 0.5) * 2.0**-53
            coords.append((cell[k] + u) * cell_edge)
        u = ((mix64((key_attr + (off + d + 1) * GOLDEN) & MASK64) >> 11) + 0.5) * 2.0**-53
        delays.append((slab + u) * slab_height)
        u = ((mix64((key_attr + (off + d + 2) * GOLDEN) & MASK64) >> 11) + 0.5) * 2.0**-53
        radii.append(sample_radius(law_kind, p1, p2, u))
        u = ((mix64((key_attr + (off + d + 3) * GOLDEN) & MASK64) >> 11) + 0.5) * 2.0**-53
        thins.append(u)
    return coords, delays, radii, thins


def first_cover_hit(x, bucket, centers, radii, d: int) -> int:
    """First ball in ``bucket`` order whose closed ball contains ``x``.

    ``bucket`` holds ball ids in ascending birth order, so the first hit is
    the earliest cover. Returns -1 when no listed ball contains the point.
    """
    for bi in bucket:
        base = bi * d
        s = 0.0
        for k in range(d):
            dx = x[k] - centers[base + k]
            s += dx * dx
        r = radii[bi]
        if s <= r * r:
            return bi
    return -1


def scan_hits(cx, rho: float, coords, d: int) -> list[int]:
    """Indices of flat-packed points within the closed ball (cx, rho)."""
    hits: list[int] = []
    m = len(coords) // d
    rr = rho * rho
    base = 0
    for i in range(m):
        s = 0.0
        for k in range(d):
            dx = cx[k] - coords[base + k]
            s += dx * dx
        if s <= rr:
            hits.append(i)
        base += d
    return hits


def find_uncovered_core(
    lo,
    hi,
    mask_center,
    mask_radius: float,
    ids,
    centers,
    radii,
    delta: float,
    d: int,
):
    """Hierarchical subdivision search for a point of the domain not covered
    by any candidate ball.

    The domain is the axis box [lo, hi] intersected with the closed mask
    ball when ``mask_center`` is not None. Boxes entirely inside a single
    candidate ball are discarded (exact); boxes disjoint from every
    candidate yield an immediate certified witness; otherwise boxes split
    along their longest edge until every edge is at most ``delta``. A leaf
    whose representative point lies in no candidate ball is a certified
    witness; leaves that cannot be settled either way are remembered and the
    first one is reported uncertified if no certified witness exists.

    Returns None when the whole domain is covered (exact verdict up to the
    delta-resolution leaves described above), else ``(point, certified)``.
    """
    has_mask = mask_center is not None
    mr2 = mask_radius * mask_radius if has_mask else 0.0
    stack = [(tuple(lo), tuple(hi))]
    ambiguous = None
    while stack:
        blo, bhi = stack.pop()
        if has_mask:
            s = 0.0
            for k in range(d):
                v = mask_center[k]
                e = blo[k]
                if v < e:
                    dx = e - v
                else:
                    e = bhi[k]
                    dx = v - e if v > e else 0.0
                s += dx * dx
            if s > mr2:
                continue
        covered = False
        any_hit = False
        for j in ids:
            base = j * d
            near = 0.0
            for k in range(d):
                v = centers[base + k]
                e = blo[k]
                if v < e:
                    dx = e - v
                else:
                    e = bhi[k]
                    dx = v - e if v > e else 0.0
                near += dx * dx
            r = radii[j]
            if near > r * r:
                continue
            any_hit = True
            far = 0.0
            for k in range(d):
                v = centers[base + k]
                a = v - blo[k]
                if a < 0.0:
                    a = -a
                b = bhi[k] - v
                if b < 0.0:
                    b = -b
                dx = a if a > b else b
                far += dx * dx
            if far <= r * r:
                covered = True
                break
        if covered:
            continue
        if has_mask:
            q = []
            for k in range(d):
                v = mask_center[k]
                if v < blo[k]:
                    v = blo[k]
                elif v > bhi[k]:
                    v = bhi[k]
                q.append(v)
            q = tuple(q)
        else:
            q = tuple(0.5 * (blo[k] + bhi[k]) for k in range(d))
        if not any_hit:
            return q, True
        longest = 0.0
        axis = 0
        for k in range(d):
            e = bhi[k] - blo[k]
            if e > longest:
                longest = e
                axis = k
        if longest <= delta:
            hit = False
            for j in ids:
                base = j * d
                s = 0.0
                for k in range(d):
                    dx = q[k] - centers[base + k]
                    s += dx * dx
                r = radii[j]
                if s <= r * r:
                    hit = True
                    break
            if not hit:
                return q, True
            if ambiguous is None:
                ambiguous = q
            continue
        mid = 0.5 * (blo[axis] + bhi[axis])
        upper_lo = blo[:axis] + (mid,) + blo[axis + 1 :]
        lower_hi = bhi[:axis] + (mid,) + bhi[axis + 1 :]
        stack.append((upper_lo, bhi))
        stack.append((blo, lower_hi))
    if ambiguous is not None:
        return ambiguous, False
    return None

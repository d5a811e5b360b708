# cython: language_level=3
"""Compiled kernels, a statement-level transliteration of ``pyref``.

Every arithmetic statement mirrors the reference module in the same order
on C doubles and native unsigned 64-bit words, so results are bit-identical
to the pure-Python backend on the same platform and libm. Any change to
``pyref`` must be mirrored here.
"""

import array

from cpython cimport array
from libc.math cimport exp, expm1, log, log1p
from libc.stdint cimport uint64_t
from libc.stdlib cimport free, malloc, realloc

from ..rng import GOLDEN as _PY_GOLDEN
from ..rng import TAG_ATTR as _PY_TAG_ATTR
from ..rng import TAG_COUNT as _PY_TAG_COUNT

BACKEND = "fast"
MAX_DIMENSION = 16

cdef uint64_t GOLDEN = <uint64_t>_PY_GOLDEN
cdef uint64_t TAG_COUNT = <uint64_t>_PY_TAG_COUNT
cdef uint64_t TAG_ATTR = <uint64_t>_PY_TAG_ATTR
cdef double INV2_53 = 2.0 ** -53
cdef object _MASK64_PY = (1 << 64) - 1

cdef array.array _DBL_TEMPLATE = array.array("d")

_PY_INT = int


cdef inline uint64_t _mix64(uint64_t z) nogil:
    z = (z ^ (z >> 30)) * <uint64_t>0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * <uint64_t>0x94D049BB133111EB
    return z ^ (z >> 31)


cdef inline uint64_t _as_u64(object v):
    return <uint64_t>(<object>v & _MASK64_PY)


cdef inline double _unit(uint64_t x) nogil:
    return (<double>(x >> 11) + 0.5) * INV2_53


cdef inline double _sample_radius(int kind, double p1, double p2, double u) nogil:
    if kind == 0:
        return p1
    if kind == 1:
        return p1 + (p2 - p1) * u
    if kind == 2:
        return -log(u) / p1
    return -log1p(-u * -expm1(-p1 * p2)) / p1


cdef double[::1] _as_d(object obj):
    cdef double[::1] mv
    try:
        mv = obj
    except (TypeError, ValueError):
        mv = array.array("d", obj)
    return mv


cdef long long[::1] _as_q(object obj):
    cdef long long[::1] mv
    try:
        mv = obj
    except (TypeError, ValueError):
        mv = array.array("q", obj)
    return mv


def cell_points(
    seed,
    cell,
    slab,
    double mean,
    double cell_edge,
    double slab_height,
    int law_kind,
    double p1,
    double p2,
):
    """Materialize the marked points of one (cell, slab) block.

    Same contract as the reference backend; returns flat location
    coordinates, delays, radii, and thinning values as ``array('d')``.
    """
    cdef int d = len(cell)
    if d > MAX_DIMENSION:
        raise ValueError(f"dimension {d} exceeds the compiled kernel limit {MAX_DIMENSION}")
    if law_kind < 0 or law_kind > 3:
        raise ValueError(f"unknown radius-law kind {law_kind}")
    cdef long long cell_i[16]
    cdef int k
    cdef uint64_t h = <uint64_t>0x243F6A8885A308D3
    h = _mix64(h ^ _as_u64(seed))
    for k in range(d):
        cell_i[k] = cell[k]
        h = _mix64(h ^ _as_u64(cell[k]))
    h = _mix64(h ^ _as_u64(slab))
    cdef uint64_t key_count = _mix64(h ^ TAG_COUNT)
    cdef uint64_t key_attr = _mix64(h ^ TAG_ATTR)
    cdef long long slab_i = slab

    cdef double limit = exp(-mean)
    cdef long long n = 0
    cdef double p = 1.0
    cdef double u
    while True:
        u = _unit(_mix64(key_count + <uint64_t>(n + 1) * GOLDEN))
        p *= u
        n += 1
        if p <= limit:
            break
    n -= 1

    cdef long long stride = d + 3
    cdef array.array coords = array.clone(_DBL_TEMPLATE, n * d, zero=False)
    cdef array.array delays = array.clone(_DBL_TEMPLATE, n, zero=False)
    cdef array.array radii = array.clone(_DBL_TEMPLATE, n, zero=False)
    cdef array.array thins = array.clone(_DBL_TEMPLATE, n, zero=False)
    cdef double* cp = coords.data.as_doubles
    cdef double* dp = delays.data.as_doubles
    cdef double* rp = radii.data.as_doubles
    cdef double* tp = thins.data.as_doubles
    cdef long long j, off
    for j in range(n):
        off = j * stride
        for k in range(d):
            u = _unit(_mix64(key_attr + <uint64_t>(off + k + 1) * GOLDEN))
            cp[j * d + k] = (<double>cell_i[k] + u) * cell_edge
        u = _unit(_mix64(key_attr + <uint64_t>(off + d + 1) * GOLDEN))
        dp[j] = (<double>slab_i + u) * slab_height
        u = _unit(_mix64(key_attr + <uint64_t>(off + d + 2) * GOLDEN))
        rp[j] = _sample_radius(law_kind, p1, p2, u)
        u = _unit(_mix64(key_attr + <uint64_t>(off + d + 3) * GOLDEN))
        tp[j] = u
    return coords, delays, radii, thins


def first_cover_hit(x, bucket, centers, radii, int d):
    """First ball in ``bucket`` order whose closed ball contains ``x``."""
    cdef double xc[16]
    cdef int k
    if d > MAX_DIMENSION:
        raise ValueError(f"dimension {d} exceeds the compiled kernel limit {MAX_DIMENSION}")
    for k in range(d):
        xc[k] = x[k]
    cdef long long[::1] bucket_mv = _as_q(bucket)
    cdef double[::1] centers_mv = _as_d(centers)
    cdef double[::1] radii_mv = _as_d(radii)
    cdef Py_ssize_t i
    cdef long long bi, base
    cdef double s, dx, r
    for i in range(bucket_mv.shape[0]):
        bi = bucket_mv[i]
        base = bi * d
        s = 0.0
        for k in range(d):
            dx = xc[k] - centers_mv[base + k]
            s += dx * dx
        r = radii_mv[bi]
        if s <= r * r:
            return _PY_INT(bi)
    return -1


def scan_hits(cx, double rho, coords, int d):
    """Indices of flat-packed points within the closed ball (cx, rho)."""
    cdef double cc[16]
    cdef int k
    if d > MAX_DIMENSION:
        raise ValueError(f"dimension {d} exceeds the compiled kernel limit {MAX_DIMENSION}")
    for k in range(d):
        cc[k] = cx[k]
    cdef double[::1] coords_mv = _as_d(coords)
    cdef list hits = []
    cdef Py_ssize_t m = coords_mv.shape[0] // d
    cdef double rr = rho * rho
    cdef Py_ssize_t base = 0
    cdef Py_ssize_t i
    cdef double s, dx
    for i in range(m):
        s = 0.0
        for k in range(d):
            dx = cc[k] - coords_mv[base + k]
            s += dx * dx
        if s <= rr:
            hits.append(_PY_INT(i))
        base += d
    return hits


def find_uncovered_core(
    lo,
    hi,
    mask_center,
    double mask_radius,
    ids,
    centers,
    radii,
    double delta,
    int d,
):
    """Hierarchical subdivision search for an uncovered domain point.

    Same contract and verdicts as the reference backend: None when the
    domain (box intersected with the optional mask ball) is covered, else
    ``(point, certified)``.
    """
    if d > MAX_DIMENSION:
        raise ValueError(f"dimension {d} exceeds the compiled kernel limit {MAX_DIMENSION}")
    cdef int has_mask = mask_center is not None
    cdef double mc[16]
    cdef int k
    if has_mask:
        for k in range(d):
            mc[k] = mask_center[k]
    cdef double mr2 = mask_radius * mask_radius if has_mask else 0.0
    cdef long long[::1] ids_mv = _as_q(ids)
    cdef double[::1] centers_mv = _as_d(centers)
    cdef double[::1] radii_mv = _as_d(radii)
    cdef Py_ssize_t n_ids = ids_mv.shape[0]

    cdef Py_ssize_t cap = 64
    cdef Py_ssize_t top = 0
    cdef Py_ssize_t width = 2 * d
    cdef double* st = <double*>malloc(cap * width * sizeof(double))
    if st is NULL:
        raise MemoryError()
    cdef double* grown
    cdef double cur_lo[16]
    cdef double cur_hi[16]
    cdef double q[16]
    cdef double amb[16]
    cdef int have_amb = 0
    cdef int covered, any_hit, hit
    cdef Py_ssize_t i
    cdef long long j, base
    cdef double s, v, e, dx, near, far, r, a, b, longest, mid
    cdef int axis

    try:
        for k in range(d):
            st[k] = lo[k]
            st[d + k] = hi[k]
        top = 1
        while top > 0:
            top -= 1
            for k in range(d):
                cur_lo[k] = st[top * width + k]
                cur_hi[k] = st[top * width + d + k]
            if has_mask:
                s = 0.0
                for k in range(d):
                    v = mc[k]
                    e = cur_lo[k]
                    if v < e:
                        dx = e - v
                    else:
                        e = cur_hi[k]
                        dx = v - e if v > e else 0.0
                    s += dx * dx
                if s > mr2:
                    continue
            covered = 0
            any_hit = 0
            for i in range(n_ids):
                j = ids_mv[i]
                base = j * d
                near = 0.0
                for k in range(d):
                    v = centers_mv[base + k]
                    e = cur_lo[k]
                    if v < e:
                        dx = e - v
                    else:
                        e = cur_hi[k]
                        dx = v - e if v > e else 0.0
                    near += dx * dx
                r = radii_mv[j]
                if near > r * r:
                    continue
                any_hit = 1
                far = 0.0
                for k in range(d):
                    v = centers_mv[base + k]
                    a = v - cur_lo[k]
                    if a < 0.0:
                        a = -a
                    b = cur_hi[k] - v
                    if b < 0.0:
                        b = -b
                    dx = a if a > b else b
                    far += dx * dx
                if far <= r * r:
                    covered = 1
                    break
            if covered:
                continue
            if has_mask:
                for k in range(d):
                    v = mc[k]
                    if v < cur_lo[k]:
                        v = cur_lo[k]
                    elif v > cur_hi[k]:
                        v = cur_hi[k]
                    q[k] = v
            else:
                for k in range(d):
                    q[k] = 0.5 * (cur_lo[k] + cur_hi[k])
            if not any_hit:
                return tuple([q[k] for k in range(d)]), True
            longest = 0.0
            axis = 0
            for k in range(d):
                e = cur_hi[k] - cur_lo[k]
                if e > longest:
                    longest = e
                    axis = k
            if longest <= delta:
                hit = 0
                for i in range(n_ids):
                    j = ids_mv[i]
                    base = j * d
                    s = 0.0
                    for k in range(d):
                        dx = q[k] - centers_mv[base + k]
                        s += dx * dx
                    r = radii_mv[j]
                    if s <= r * r:
                        hit = 1
                        break
                if not hit:
                    return tuple([q[k] for k in range(d)]), True
                if not have_amb:
                    for k in range(d):
                        amb[k] = q[k]
                    have_amb = 1
                continue
            mid = 0.5 * (cur_lo[axis] + cur_hi[axis])
            if top + 2 > cap:
                cap = cap * 2
                grown = <double*>realloc(st, cap * width * sizeof(double))
                if grown is NULL:
                    raise MemoryError()
                st = grown
            for k in range(d):
                st[top * width + k] = cur_lo[k]
                st[top * width + d + k] = cur_hi[k]
            st[top * width + axis] = mid
            top += 1
            for k in range(d):
                st[top * width + k] = cur_lo[k]
                st[top * width + d + k] = cur_hi[k]
            st[top * width + d + axis] = mid
            top += 1
    finally:
        free(st)
    if have_amb:
        return tuple([amb[k] for k in range(d)]), False
    return None

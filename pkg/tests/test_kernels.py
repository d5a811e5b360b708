"""Bitwise parity between the compiled and pure-Python kernel backends."""

from __future__ import annotations

import json
import os
import subprocess
import sys

import pytest

from outburst import _kernels

HAVE_FAST = "fast" in _kernels.available_backends()
needs_fast = pytest.mark.skipif(not HAVE_FAST, reason="compiled backend not built")

PY = _kernels.get_backend("py")


def test_backend_registry():
    assert _kernels.BACKEND in ("py", "fast")
    assert "py" in _kernels.available_backends()
    with pytest.raises(ValueError):
        _kernels.get_backend("gpu")


@needs_fast
def test_max_dimension_agrees():
    fast = _kernels.get_backend("fast")
    assert fast.MAX_DIMENSION == PY.MAX_DIMENSION
    assert fast.BACKEND == "fast"


@needs_fast
def test_cell_points_bitwise_parity():
    fast = _kernels.get_backend("fast")
    cases = []
    for seed in (0, 1, 9917, 2**63 - 1):
        for cell in ((0, 0), (-3, 7), (12, -44)):
            for slab in (0, 1, 5):
                for law_kind, p1, p2 in ((0, 1.0, 0.0), (1, 2.0, 0.0),
                                         (2, 1.5, 0.0), (3, 1.0, 4.0)):
                    cases.append((seed, cell, slab, 2.0, 1.0, 1.0,
                                  law_kind, p1, p2))
    cases.append((7, (1, 2, 3), 0, 3.0, 0.5, 2.0, 2, 1.0, 0.0))
    for args in cases:
        a = PY.cell_points(*args)
        b = fast.cell_points(*args)
        assert len(a) == len(b) == 4
        for xs, ys in zip(a, b):
            assert list(xs) == list(ys)


def _scene(seed, n=25, d=2):
    import random

    rng = random.Random(seed)
    centers = []
    radii = []
    for _ in range(n):
        for _ in range(d):
            centers.append(rng.uniform(-5.0, 5.0))
        radii.append(rng.uniform(0.2, 2.5))
    return centers, radii


@needs_fast
def test_point_kernels_bitwise_parity():
    fast = _kernels.get_backend("fast")
    import random

    for seed in range(6):
        centers, radii = _scene(seed)
        ids = list(range(len(radii)))
        rng = random.Random(100 + seed)
        for _ in range(50):
            x = (rng.uniform(-6, 6), rng.uniform(-6, 6))
            assert PY.first_cover_hit(x, ids, centers, radii, 2) == \
                fast.first_cover_hit(x, ids, centers, radii, 2)
        coords = [rng.uniform(-6, 6) for _ in range(2 * 200)]
        for _ in range(10):
            cx = (rng.uniform(-6, 6), rng.uniform(-6, 6))
            rho = rng.uniform(0.1, 4.0)
            assert PY.scan_hits(cx, rho, coords, 2) == \
                fast.scan_hits(cx, rho, coords, 2)


@needs_fast
def test_find_uncovered_core_bitwise_parity():
    fast = _kernels.get_backend("fast")
    for seed in range(10):
        centers, radii = _scene(seed, n=12)
        ids = list(range(len(radii)))
        lo, hi = (-2.0, -2.0), (2.0, 2.0)
        for mask in (None, ((0.0, 0.0), 1.8)):
            mc = mask[0] if mask else None
            mr = mask[1] if mask else 0.0
            a = PY.find_uncovered_core(lo, hi, mc, mr, ids, centers, radii, 1e-2, 2)
            b = fast.find_uncovered_core(lo, hi, mc, mr, ids, centers, radii, 1e-2, 2)
            if a is None:
                assert b is None
            else:
                assert b is not None
                assert tuple(a[0]) == tuple(b[0])
                assert a[1] == b[1]


_DRIVER = r"""
import json, sys
from outburst import _kernels
from outburst.compete import CompeteConfig, run_compete
from outburst.env import EnvConfig, RadiusLaw
from outburst.passage import passage_time

env = EnvConfig(dimension=2, rate=1.0, seed=20250819, law=RadiusLaw.uniform_half_open(0.5, 1.5))
res = passage_time(env, (0.0, 0.0), (3.0, 0.0))
cfg = CompeteConfig(env=EnvConfig(dimension=2, rate=1.0, seed=4242, law=RadiusLaw.dirac(1.0)),
                    lambda1=0.8, lambda2=1.0, separation=4.0, exit_radii=(2.0, 3.0))
out = run_compete(cfg)
print(json.dumps({
    "backend": _kernels.BACKEND,
    "time": res.time,
    "events": res.events,
    "audit": res.audit,
    "exit_times": sorted((t, k, v) for (t, k), v in out.exit_times.items()),
    "clock": out.clock,
    "n": out.events,
}))
"""


@needs_fast
def test_full_run_parity_across_backends():
    outs = {}
    for backend in ("py", "fast"):
        env = dict(os.environ, OUTBURST_KERNELS=backend)
        proc = subprocess.run(
            [sys.executable, "-c", _DRIVER],
            capture_output=True, text=True, env=env, check=True,
        )
        outs[backend] = json.loads(proc.stdout)
    assert outs["py"]["backend"] == "py"
    assert outs["fast"]["backend"] == "fast"
    for key in ("time", "events", "audit", "exit_times", "clock", "n"):
        assert outs["py"][key] == outs["fast"][key], key


def test_forcing_missing_backend_fails_loudly():
    env = dict(os.environ, OUTBURST_KERNELS="nonsense")
    proc = subprocess.run(
        [sys.executable, "-c",
         "from outburst import _kernels; print(_kernels.BACKEND)"],
        capture_output=True, text=True, env=env,
    )
    # Unknown values mean auto-selection, never a crash.
    assert proc.returncode == 0
    assert proc.stdout.strip() in ("py", "fast")

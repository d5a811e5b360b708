"""Compare the compiled and pure-Python kernel backends.

Runs each workload in a subprocess with OUTBURST_KERNELS forced, so both
backends are measured under identical, freshly imported conditions.

Usage: python benchmarks/bench_backends.py [--quick]
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys

_WORKER = r"""
import json, sys, time
from outburst import _kernels

quick = bool(int(sys.argv[1]))
out = {"backend": _kernels.BACKEND}

def timeit(fn, reps):
    t0 = time.perf_counter()
    for _ in range(reps):
        fn()
    t1 = time.perf_counter()
    return (t1 - t0) / reps

# kernel micro: block materialization
reps = 200 if quick else 2000
out["cell_points_us"] = 1e6 * timeit(
    lambda: _kernels.cell_points(42, (3, -2), 5, 4.0, 1.0, 1.0, 1, 0.5, 1.5), reps
)

# kernel micro: subdivision coverage search over a crowded scene
from array import array
import math
from outburst.rng import UnitStream, make_key
s = UnitStream(make_key(7))
n = 300
centers = array("d")
radii = array("d")
for i in range(n):
    centers.append(s.uniform(-4.0, 4.0))
    centers.append(s.uniform(-4.0, 4.0))
    radii.append(s.uniform(0.4, 1.0))
ids = array("q", range(n))
reps = 20 if quick else 200
out["find_uncovered_us"] = 1e6 * timeit(
    lambda: _kernels.find_uncovered_core(
        (-3.0, -3.0), (3.0, 3.0), (0.0, 0.0), 3.0, ids, centers, radii, 1e-3, 2
    ),
    reps,
)

# end-to-end: one passage-time run
from outburst import EnvConfig, RadiusLaw, passage_time
cfg = EnvConfig(2, 1.0, 12345, RadiusLaw.uniform_half_open(0.5, 1.5))
dist = 4.0 if quick else 8.0
t0 = time.perf_counter()
res = passage_time(cfg, (0.0, 0.0), (dist, 0.0))
out["passage_s"] = time.perf_counter() - t0
out["passage_events"] = res.events
out["passage_time_value"] = res.time

print(json.dumps(out))
"""


def run_backend(backend: str, quick: bool) -> dict:
    env = dict(os.environ)
    env["OUTBURST_KERNELS"] = backend
    proc = subprocess.run(
        [sys.executable, "-c", _WORKER, str(int(quick))],
        capture_output=True,
        text=True,
        env=env,
        check=True,
    )
    return json.loads(proc.stdout)


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--quick", action="store_true", help="smaller workloads")
    ns = ap.parse_args()
    rows = []
    for backend in ("fast", "py"):
        try:
            rows.append(run_backend(backend, ns.quick))
        except subprocess.CalledProcessError as exc:
            print(f"backend {backend!r} failed:\n{exc.stderr}", file=sys.stderr)
            if backend == "py":
                return 1
    if len(rows) == 2 and rows[0]["passage_time_value"] != rows[1]["passage_time_value"]:
        print("WARNING: backends disagree on the passage-time value", file=sys.stderr)

    print(f"{'metric':<24}" + "".join(f"{r['backend']:>14}" for r in rows) + f"{'speedup':>10}")
    for key, unit in (
        ("cell_points_us", "us"),
        ("find_uncovered_us", "us"),
        ("passage_s", "s"),
    ):
        vals = [r[key] for r in rows]
        line = f"{key:<24}" + "".join(f"{v:>13.2f}{'':1}" for v in vals)
        if len(vals) == 2 and vals[0] > 0:
            line += f"{vals[1] / vals[0]:>9.1f}x"
        print(line)
    ev = rows[0]["passage_events"]
    print(f"(passage run: {ev} events, value {rows[0]['passage_time_value']:.4f})")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

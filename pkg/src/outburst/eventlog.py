"""Event-log persistence: one CSV record per ball plus a key-value manifest.

Floats are printed with 17 significant digits so a round trip through text
is exact. The same format serves engine and rejection-sampler histories.
"""

from __future__ import annotations

import csv
from pathlib import Path

from .engine import GrowthBall, History
from .env import EnvConfig, RadiusLaw
from .util import read_kv, write_kv


def _f(x: float) -> str:
    return format(x, ".17g")


def _prov_to_str(prov: tuple) -> str:
    return ":".join(str(p) for p in prov)


def _prov_from_str(s: str) -> tuple:
    parts = s.split(":")
    out = []
    for p in parts:
        try:
            out.append(int(p))
        except ValueError:
            out.append(p)
    return tuple(out)


def manifest_path(csv_path) -> Path:
    return Path(str(csv_path) + ".manifest.txt")


def write_event_log(
    path,
    history: History,
    cfg: EnvConfig | None = None,
    lambda1: float | None = None,
    lambda2: float | None = None,
):
    """Write ``history`` as CSV plus a sidecar manifest."""
    d = history.dimension
    header = ["birth", "type_tag"] + [f"c{k}" for k in range(d)] + [
        "radius",
        "redundant",
        "provenance",
    ]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for b in history.balls():
            w.writerow(
                [_f(b.birth), b.type_tag]
                + [_f(c) for c in b.center]
                + [_f(b.radius), int(b.redundant), _prov_to_str(b.provenance)]
            )
    items: dict[str, str] = {
        "format": "outburst-event-log-1",
        "dimension": str(d),
        "n_seeds": str(len(history.seeds)),
        "n_events": str(len(history.events)),
        "clock": _f(history.clock),
        "stop_reason": history.stop_reason,
        "censored": str(history.censored).lower(),
    }
    if cfg is not None:
        items.update(
            {
                "rate": _f(cfg.rate),
                "seed": str(cfg.seed),
                "cell_edge": _f(cfg.cell_edge),
                "slab_height": _f(cfg.slab_height),
                "law": cfg.law.family,
                "law_p1": _f(cfg.law.p1),
                "law_p2": _f(cfg.law.p2),
            }
        )
    if lambda1 is not None:
        items["lambda1"] = _f(lambda1)
    if lambda2 is not None:
        items["lambda2"] = _f(lambda2)
    for key, value in history.audit.items():
        items[f"audit_{key}"] = str(value)
    write_kv(manifest_path(path), items)


def read_event_log(path) -> tuple[History, dict[str, str]]:
    """Rebuild a History (and its manifest dict) from :func:`write_event_log`
    output."""
    manifest = read_kv(manifest_path(path))
    d = int(manifest["dimension"])
    n_seeds = int(manifest["n_seeds"])
    seeds: list[GrowthBall] = []
    events: list[GrowthBall] = []
    with open(path, newline="", encoding="utf-8") as fh:
        r = csv.reader(fh)
        header = next(r)
        assert header[:2] == ["birth", "type_tag"]
        for i, row in enumerate(r):
            birth = float(row[0])
            type_tag = int(row[1])
            center = tuple(float(v) for v in row[2 : 2 + d])
            radius = float(row[2 + d])
            redundant = row[3 + d] == "1"
            prov = _prov_from_str(row[4 + d])
            g = GrowthBall(center, radius, birth, type_tag, prov, redundant)
            (seeds if i < n_seeds else events).append(g)
    audit = {
        k[len("audit_") :]: int(v) for k, v in manifest.items() if k.startswith("audit_")
    }
    history = History(
        dimension=d,
        seeds=tuple(seeds),
        events=tuple(events),
        clock=float(manifest["clock"]),
        stop_reason=manifest["stop_reason"],
        censored=manifest["censored"] == "true",
        audit=audit,
    )
    return history, manifest


_LAW_BUILDERS = {
    "dirac": lambda p1, p2: RadiusLaw.dirac(p1),
    "uniform": lambda p1, p2: RadiusLaw.uniform_half_open(p1, p2),
    "exponential": lambda p1, p2: RadiusLaw.exponential(p1),
    "truncated_exponential": lambda p1, p2: RadiusLaw.truncated_exponential(p1, p2),
}


def law_from_manifest(manifest: dict[str, str]) -> RadiusLaw:
    return _LAW_BUILDERS[manifest["law"]](float(manifest["law_p1"]), float(manifest["law_p2"]))

"""Small shared helpers: flat key-value files and replication-level
parallelism."""

from __future__ import annotations

import concurrent.futures
from pathlib import Path
from typing import Callable, Iterable, Sequence


def write_kv(path, items: dict[str, str]):
    """Write a flat ``key = value`` text file (one pair per line)."""
    lines = [f"{k} = {v}" for k, v in items.items()]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_kv(path) -> dict[str, str]:
    """Read a flat ``key = value`` file; '#' starts a comment line."""
    out: dict[str, str] = {}
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"malformed config line: {raw!r}")
        key, _, value = line.partition("=")
        out[key.strip()] = value.strip()
    return out


def pmap(fn: Callable, items: Sequence, jobs: int = 1) -> list:
    """Map ``fn`` over ``items`` preserving order, optionally in worker
    processes. Results are deterministic regardless of ``jobs`` because
    every item carries its own derived seed."""
    if jobs <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
        chunk = max(1, len(items) // (8 * jobs))
        return list(pool.map(fn, items, chunksize=chunk))

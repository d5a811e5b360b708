"""Kernel backend selection.

The hot numeric kernels (point-process materialization, first-cover scans,
coverage subdivision) exist twice: a compiled Cython module ``_fast`` and a
pure-Python reference ``pyref``. Both implement literally the same
arithmetic in the same order, so results are identical bit for bit; the
test suite enforces this whenever the compiled module is importable.

Selection happens once at import time via the ``OUTBURST_KERNELS``
environment variable: ``fast`` forces the compiled module (ImportError if
missing), ``py`` forces the reference, anything else (default) prefers the
compiled module and silently falls back.
"""

import os as _os

_choice = _os.environ.get("OUTBURST_KERNELS", "auto").strip().lower()

if _choice in ("fast", "c", "compiled"):
    from . import _fast as active  # type: ignore[attr-defined]
elif _choice in ("py", "pure", "python"):
    from . import pyref as active
else:
    try:
        from . import _fast as active  # type: ignore[attr-defined]
    except ImportError:
        from . import pyref as active

BACKEND: str = active.BACKEND
MAX_DIMENSION: int = active.MAX_DIMENSION

cell_points = active.cell_points
first_cover_hit = active.first_cover_hit
scan_hits = active.scan_hits
find_uncovered_core = active.find_uncovered_core


def get_backend(name: str):
    """Import a specific backend module by name (for tests and benchmarks)."""
    if name in ("fast", "c", "compiled"):
        from . import _fast  # type: ignore[attr-defined]

        return _fast
    if name in ("py", "pure", "python"):
        from . import pyref

        return pyref
    raise ValueError(f"unknown kernel backend {name!r}")


def available_backends() -> list[str]:
    names = ["py"]
    try:
        from . import _fast  # type: ignore[attr-defined]  # noqa: F401

        names.append("fast")
    except ImportError:
        pass
    return names

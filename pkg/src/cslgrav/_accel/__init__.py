"""Backend selection for the hot inner loops.

The compiled Cython extension is preferred when importable; the pure-numpy
module is the always-available fallback. Selection order:

1. environment variable CSLGRAV_BACKEND = "python" | "compiled" | "auto"
2. "auto" (default): compiled if it imports, else python.

Requesting "compiled" when the extension is missing raises at first use, so
misconfigured deployments fail loudly instead of silently running slow.
"""

from __future__ import annotations

import os

from . import pure

try:
    from . import _core
    _COMPILED = _core
except ImportError:
    _COMPILED = None

_REQUIRED = ("csl_step_batch", "apply_matrix_batch", "accumulate_forces")


class _Backend:
    """Thin namespace bundling one implementation of the three kernels."""

    def __init__(self, name: str, module):
        self.name = name
        for fn in _REQUIRED:
            setattr(self, fn, getattr(module, fn))

    def __repr__(self):
        return f"<cslgrav backend {self.name!r}>"


def available_backends() -> tuple[str, ...]:
    return ("python", "compiled") if _COMPILED is not None else ("python",)


def get_backend(name: str | None = None) -> _Backend:
    """Resolve a backend by name; None consults CSLGRAV_BACKEND, then auto."""
    if name is None:
        name = os.environ.get("CSLGRAV_BACKEND", "auto").strip().lower() or "auto"
    if name == "auto":
        name = "compiled" if _COMPILED is not None else "python"
    if name == "python":
        return _Backend("python", pure)
    if name == "compiled":
        if _COMPILED is None:
            raise RuntimeError(
                "compiled backend requested but cslgrav._accel._core is not "
                "built; reinstall with a C compiler or set CSLGRAV_BACKEND=python"
            )
        return _Backend("compiled", _COMPILED)
    raise ValueError(f"unknown backend {name!r}; expected python|compiled|auto")


def default_backend_name() -> str:
    return get_backend().name

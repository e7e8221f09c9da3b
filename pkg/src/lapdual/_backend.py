"""Kernel selection: the compiled extension when importable, numpy otherwise.

Set ``LAPDUAL_BACKEND=python`` to force the numpy kernel.
"""

from __future__ import annotations

import os

from . import _pykernel

try:
    from . import _kernel as _compiled
except ImportError:  # pragma: no cover - depends on the build
    _compiled = None

_KERNELS = {"python": _pykernel}
if _compiled is not None:
    _KERNELS["cython"] = _compiled


def available() -> tuple[str, ...]:
    return tuple(_KERNELS)


def _default() -> str:
    forced = os.environ.get("LAPDUAL_BACKEND", "").strip().lower()
    if forced:
        if forced not in _KERNELS:
            raise ImportError(f"LAPDUAL_BACKEND={forced!r} is not available; have {available()}")
        return forced
    return "cython" if "cython" in _KERNELS else "python"


BACKEND = _default()


def get(name: str | None = None):
    """Module exposing ``advance`` for ``name`` (default: the selected backend)."""
    return _KERNELS[name or BACKEND]

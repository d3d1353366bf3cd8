"""Kernel backend selection.

The hot kernels (sampling, loss transforms, grid scans) exist twice: a
compiled Cython extension and a pure NumPy fallback that produce bit-identical
results.  The compiled one is preferred when importable; the environment
variable CYINS_BACKEND (``compiled`` | ``python`` | ``auto``) or
:func:`use_backend` overrides the choice.
"""

from __future__ import annotations

import os
from contextlib import contextmanager

from . import _kernels_py

try:
    from . import _kernels  # type: ignore[attr-defined]
except ImportError:  # extension not built; NumPy fallback only
    _kernels = None

_BACKENDS = {"python": _kernels_py}
if _kernels is not None:
    _BACKENDS["compiled"] = _kernels

_forced = os.environ.get("CYINS_BACKEND", "auto").strip().lower() or "auto"
if _forced not in ("auto", *_BACKENDS):
    raise ImportError(
        f"CYINS_BACKEND={_forced!r} is not available; choose from "
        f"{('auto', *sorted(_BACKENDS))}")

_active = _BACKENDS.get(_forced) or _BACKENDS.get("compiled") or _kernels_py


def available_backends() -> tuple[str, ...]:
    """Names of the backends importable in this environment."""
    return tuple(sorted(_BACKENDS))


def backend_name() -> str:
    """Name of the backend currently in use."""
    return _active.BACKEND_NAME


def kernels():
    """The active kernel module."""
    return _active


@contextmanager
def use_backend(name: str):
    """Temporarily switch the active backend (testing and benchmarking)."""
    global _active
    if name not in _BACKENDS:
        raise ValueError(f"backend {name!r} not available; have {available_backends()}")
    previous = _active
    _active = _BACKENDS[name]
    try:
        yield _active
    finally:
        _active = previous

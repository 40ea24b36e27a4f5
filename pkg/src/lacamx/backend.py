"""Kernel backend selection: compiled extension with pure-Python fallback.

The hot kernels (BFS distance fills, PIBT successor generation, scattered-path
A*, SIPP) exist twice: ``lacamx._kernels`` is a Cython extension and
``lacamx._kernels_py`` is a plain-Python implementation with identical
semantics, including bit-identical random streams.  The compiled backend is
picked at import when available; ``LACAMX_BACKEND=python`` (or
:func:`select`) forces the fallback, which is how the backend benchmark and
the equivalence tests drive both.
"""

from __future__ import annotations

import os
from types import ModuleType

from . import _kernels_py

_compiled: ModuleType | None
try:
    from . import _kernels as _compiled_mod

    _compiled = _compiled_mod
except ImportError:  # extension not built; fallback keeps everything working
    _compiled = None

_BY_NAME: dict[str, ModuleType] = {"python": _kernels_py}
if _compiled is not None:
    _BY_NAME["compiled"] = _compiled


def available() -> list[str]:
    return sorted(_BY_NAME)


def _initial() -> ModuleType:
    requested = os.environ.get("LACAMX_BACKEND", "auto").lower()
    if requested in _BY_NAME:
        return _BY_NAME[requested]
    if requested not in ("auto", ""):
        raise RuntimeError(
            f"LACAMX_BACKEND={requested!r} is not available; "
            f"choose from {available()} or 'auto'"
        )
    return _compiled if _compiled is not None else _kernels_py


_active: ModuleType = _initial()


def active() -> ModuleType:
    """The currently selected kernel module."""
    return _active


def name() -> str:
    return _active.NAME


def select(which: str) -> str:
    """Switch backends ('python', 'compiled', or 'auto'); returns the name.

    Affects kernels resolved after the call; do not switch mid-search.
    """
    global _active
    if which == "auto":
        _active = _compiled if _compiled is not None else _kernels_py
    elif which in _BY_NAME:
        _active = _BY_NAME[which]
    else:
        raise ValueError(f"unknown backend {which!r}; available: {available()}")
    return _active.NAME

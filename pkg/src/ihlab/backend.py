"""Backend selection for the mod-p hot kernels.

Two implementations exist: numba-jitted loops and a pure-numpy path built
on exact split-float GEMMs.  `IHLAB_BACKEND` picks one:

* ``auto``  (default) -- numba when importable, else numpy;
* ``numba`` -- require the jitted kernels;
* ``numpy`` -- force the fallback.

``benchmarks/bench_backends.py`` compares the two.
"""
from __future__ import annotations

import os

from .errors import InputError

BACKEND_ENV_VAR = "IHLAB_BACKEND"

_active = None
_active_name = None


def _load(name: str):
    if name == "numpy":
        from . import _kernels_numpy as mod
        return mod
    if name == "numba":
        from . import _kernels_numba as mod
        return mod
    raise InputError(f"unknown backend {name!r} (expected auto|numba|numpy)")


def set_backend(name: str) -> str:
    """Force a backend; returns the resolved name."""
    global _active, _active_name
    if name == "auto":
        try:
            _active = _load("numba")
            _active_name = "numba"
        except ImportError:
            _active = _load("numpy")
            _active_name = "numpy"
    else:
        _active = _load(name)
        _active_name = name
    return _active_name


def _ensure() -> None:
    if _active is None:
        set_backend(os.environ.get(BACKEND_ENV_VAR, "auto"))


def active_backend() -> str:
    _ensure()
    return _active_name


def mulmod(a, b, p):
    _ensure()
    return _active.mulmod(a, b, p)


def matmul_mod(a, b, p):
    _ensure()
    return _active.matmul_mod(a, b, p)


def rref_mod(m, p):
    _ensure()
    return _active.rref_mod(m, p)

"""Modular-exponentiation backend selection.

Every group operation in this package funnels through :func:`powmod`.  At
import time we pick the fastest available implementation: gmpy2 (a compiled
GMP extension, roughly 3-8x faster on 2048-bit moduli) when it is installed,
otherwise the interpreter's built-in three-argument ``pow``.  Both compute
the same function, so the choice never affects results, only speed.

Set RINGAUTH_PURE=1 to force the pure-Python path, e.g. to reproduce the
backend comparison in the benchmark suite.
"""

from __future__ import annotations

import os
from typing import Callable

try:
    from gmpy2 import powmod as _gmp_powmod  # type: ignore[import-untyped]

    _HAVE_GMP = True
except ImportError:
    _gmp_powmod = None
    _HAVE_GMP = False


def _pure_powmod(base: int, exp: int, mod: int) -> int:
    return pow(base, exp, mod)


def _gmp_powmod_int(base: int, exp: int, mod: int) -> int:
    return int(_gmp_powmod(base, exp, mod))


_FORCE_PURE = os.environ.get("RINGAUTH_PURE", "") not in ("", "0")

BACKENDS: dict[str, Callable[[int, int, int], int]] = {"pure": _pure_powmod}
if _HAVE_GMP:
    BACKENDS["gmp"] = _gmp_powmod_int

DEFAULT_BACKEND = "gmp" if (_HAVE_GMP and not _FORCE_PURE) else "pure"

_active_name = DEFAULT_BACKEND
_active_fn = BACKENDS[_active_name]


def powmod(base: int, exp: int, mod: int) -> int:
    """base**exp mod mod under the currently selected backend."""
    return _active_fn(base, exp, mod)


def active_backend() -> str:
    return _active_name


def available_backends() -> tuple[str, ...]:
    return tuple(sorted(BACKENDS))


def set_backend(name: str) -> str:
    """Select a backend by name ("pure" or "gmp"); returns the previous name."""
    global _active_name, _active_fn
    if name not in BACKENDS:
        raise ValueError(f"unknown backend {name!r}; available: {available_backends()}")
    previous = _active_name
    _active_name = name
    _active_fn = BACKENDS[name]
    return previous

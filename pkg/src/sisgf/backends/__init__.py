"""Kernel backend selection: compiled extension when built, numpy otherwise.

``get_kernels("auto")`` prefers the compiled module and silently falls back
to the numpy implementation when the extension is absent (pure-Python
install, failed build).  Results agree across backends up to floating-point
associativity; within a fixed backend they are bitwise reproducible.
"""

from __future__ import annotations

from . import pykernels

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

HAVE_COMPILED = _ckernels is not None

_BACKENDS = {"python": pykernels}
if HAVE_COMPILED:
    _BACKENDS["compiled"] = _ckernels


def get_kernels(name: str = "auto"):
    """Resolve a backend name to its kernel module."""
    if name == "auto":
        return _ckernels if HAVE_COMPILED else pykernels
    try:
        return _BACKENDS[name]
    except KeyError:
        available = ", ".join(["auto"] + sorted(_BACKENDS))
        raise ValueError(f"unknown backend {name!r}; available: {available}") from None


def backend_label(name: str = "auto") -> str:
    return get_kernels(name).LABEL

"""Kernel backend selection.

The compiled ``_ckernels`` extension is used when it imports; otherwise the
NumPy ``_pykernels`` module is used. Callers reach kernels through
``_backend.kernels`` at call time so that :func:`use_backend` takes effect
everywhere.
"""
from contextlib import contextmanager

from . import _pykernels

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

_BACKENDS = {"python": _pykernels}
if _ckernels is not None:
    _BACKENDS["compiled"] = _ckernels

kernels = _ckernels if _ckernels is not None else _pykernels


def available_backends():
    return sorted(_BACKENDS)


def backend_name():
    return "compiled" if kernels is _ckernels and _ckernels is not None else "python"


def use_backend(name):
    """Switch the active kernel backend ("compiled" or "python")."""
    global kernels
    try:
        kernels = _BACKENDS[name]
    except KeyError:
        raise ValueError(
            f"unknown or unavailable backend {name!r}; available: {available_backends()}"
        ) from None


@contextmanager
def using_backend(name):
    previous = backend_name()
    use_backend(name)
    try:
        yield
    finally:
        use_backend(previous)

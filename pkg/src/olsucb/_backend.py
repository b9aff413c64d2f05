"""Selects the episode backend at import time.

The compiled kernel is used when it has been built; set
``OLSUCB_BACKEND=python`` to force the pure-Python loop.
"""
import os

try:
    from . import _kernel
except ImportError:  # extension not built
    _kernel = None

HAVE_KERNEL = _kernel is not None
BACKENDS = ("compiled", "python")


def default_backend():
    forced = os.environ.get("OLSUCB_BACKEND", "").strip().lower()
    if forced == "python" or not HAVE_KERNEL:
        return "python"
    return "compiled"


def resolve(backend=None):
    backend = backend or default_backend()
    if backend not in BACKENDS:
        raise ValueError(f"unknown backend {backend!r}; choose from {BACKENDS}")
    if backend == "compiled" and not HAVE_KERNEL:
        raise RuntimeError("compiled kernel is not built; reinstall with Cython available")
    return backend

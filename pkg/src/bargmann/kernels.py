"""Hot numerical kernels with a compiled core and a numpy fallback.

The compiled extension ``bargmann._kernels`` is used when importable. Set
``BARGMANN_KERNELS=python`` to force the fallback (e.g. for benchmarking).
"""
import importlib
import os
import warnings

from bargmann import _pykernels

KERNELS_ENV = "BARGMANN_KERNELS"


def load_backend(name):
    """Return the kernel module for ``"cython"`` or ``"python"``."""
    if name == "python":
        return _pykernels
    if name == "cython":
        return importlib.import_module("bargmann._kernels")
    raise ValueError(f"unknown kernel backend {name!r}")


def available_backends():
    names = ["python"]
    try:
        load_backend("cython")
    except ImportError:
        pass
    else:
        names.insert(0, "cython")
    return names


def _select():
    requested = os.environ.get(KERNELS_ENV, "").strip().lower()
    if requested == "python":
        return _pykernels
    try:
        return load_backend("cython")
    except ImportError:
        if requested == "cython":
            raise
        warnings.warn("compiled kernels unavailable; using the numpy fallback",
                      RuntimeWarning, stacklevel=2)
        return _pykernels


_impl = _select()
BACKEND = _impl.BACKEND
permanent = _impl.permanent
fock_amplitudes = _impl.fock_amplitudes

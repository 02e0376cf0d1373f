"""Kernel backend selection.

The compiled extension is preferred; the numpy module is used when the
extension was not built. ``use_backend`` switches explicitly, which the test
suite and the kernel benchmark rely on.
"""

from . import _pykernels

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

kernels = _ckernels if _ckernels is not None else _pykernels


def available():
    """Names of the importable backends, preferred first."""
    names = []
    if _ckernels is not None:
        names.append(_ckernels.NAME)
    names.append(_pykernels.NAME)
    return names


def get(name=None):
    """Return the kernel module called ``name`` (the active one if None)."""
    if name is None:
        return kernels
    if name == "python":
        return _pykernels
    if name == "cython":
        if _ckernels is None:
            raise ImportError("compiled kernels are not available")
        return _ckernels
    raise ValueError(f"unknown backend {name!r}")


def use_backend(name):
    """Make ``name`` the active backend for all subsequent operations."""
    global kernels
    kernels = get(name)
    return kernels


def active():
    return kernels.NAME

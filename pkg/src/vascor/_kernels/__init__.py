"""Kernel backend selection.

The hot numerical paths (marginal likelihood, posterior log-density and
gradient) have two interchangeable implementations:

* ``vascor._kernels._core`` — Cython/C extension, built at install time.
* ``vascor._kernels._ref``  — pure NumPy/SciPy fallback.

The compiled backend is used when importable.  Set the environment
variable ``VASCOR_PURE_PYTHON=1`` to force the fallback (used by the
equivalence tests and the benchmark).
"""

import os

from . import _ref

if os.environ.get("VASCOR_PURE_PYTHON", "") == "1":
    backend = _ref
else:
    try:
        from . import _core as backend
    except ImportError:
        backend = _ref

IMPL = backend.IMPL


def get_backend(name=None):
    """Return a kernel backend by name ("c", "python", or None for active)."""
    if name is None:
        return backend
    if name == "python":
        return _ref
    if name == "c":
        from . import _core
        return _core
    raise ValueError(f"unknown backend {name!r}")

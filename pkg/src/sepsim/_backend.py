"""Kernel backend selection.

The Cython extension ``sepsim._core`` is used when it imports; otherwise the
pure-Python ``sepsim._pycore`` takes over.  Setting ``SEPSIM_PURE_PYTHON=1``
forces the fallback.
"""

import os
import warnings

from . import _pycore

try:
    from . import _core
except ImportError as exc:  # extension not built
    _core = None
    _import_error = exc
else:
    _import_error = None

COMPILED_AVAILABLE = _core is not None

if COMPILED_AVAILABLE and not os.environ.get("SEPSIM_PURE_PYTHON"):
    default = _core
else:
    if not COMPILED_AVAILABLE:
        warnings.warn(
            f"sepsim: compiled core unavailable ({_import_error}); using the pure-Python kernels",
            RuntimeWarning,
            stacklevel=2,
        )
    default = _pycore


def get_backend(name=None):
    """Return a kernel module: ``None`` for the default, or "compiled"/"python"."""
    if name is None:
        return default
    if name == "python":
        return _pycore
    if name == "compiled":
        if _core is None:
            raise RuntimeError(f"compiled core is not available: {_import_error}")
        return _core
    if hasattr(name, "GraphCore"):
        return name
    raise ValueError(f"unknown backend {name!r}")

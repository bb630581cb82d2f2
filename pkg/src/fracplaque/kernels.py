"""Backend selection for the hot kernels.

The compiled extension is used when it was built; setting
``FRACPLAQUE_PURE_PYTHON=1`` forces the numpy fallback.
"""

import os

from . import _kernels_py

BACKEND = "python"
if os.environ.get("FRACPLAQUE_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _impl

        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _kernels_py
else:
    _impl = _kernels_py

l1_memory = _impl.l1_memory
convection_local = _impl.convection_local
locate_points = _impl.locate_points


def backends():
    """Available kernel modules keyed by name, for benchmarks and tests."""
    out = {"python": _kernels_py}
    try:
        from . import _kernels

        out["cython"] = _kernels
    except ImportError:
        pass
    return out

"""Select the mobility kernel implementation at import time.

The compiled extension is preferred; set ``ROTOM_PURE_PYTHON=1`` to force the
numpy fallback (the test-suite uses both).
"""
from __future__ import annotations

import os

from . import _kernels_py

NAME = "python"
mobility = _kernels_py.mobility
mobility_batch = _kernels_py.mobility_batch

if os.environ.get("ROTOM_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels
    except ImportError:  # extension not built
        pass
    else:
        NAME = "cython"
        mobility = _ckernels.mobility
        mobility_batch = _ckernels.mobility_batch


def available() -> dict:
    """Kernel implementations importable in this environment, by name."""
    out = {"python": _kernels_py}
    try:
        from . import _ckernels
    except ImportError:
        pass
    else:
        out["cython"] = _ckernels
    return out

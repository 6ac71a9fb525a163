"""Backend selection for the numerical kernels.

The compiled extension is used when it imports; otherwise the pure-Python
module is used.  Set ``SAGNACBELL_PURE_PYTHON=1`` to force the fallback.
"""

import os

if os.environ.get("SAGNACBELL_PURE_PYTHON", "") not in ("", "0"):
    from . import _kernels_py as _impl
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl
        BACKEND = "cython"
    except ImportError:
        from . import _kernels_py as _impl
        BACKEND = "python"

Xoshiro256 = _impl.Xoshiro256
derive_seed = _impl.derive_seed
poisson_array = _impl.poisson_array
fringe_eval = _impl.fringe_eval
periodogram = _impl.periodogram
loggam = _impl.loggam

KIND_SIN2 = 0
KIND_COS2 = 1
KIND_COSINE = 2

__all__ = [
    "BACKEND", "Xoshiro256", "derive_seed", "poisson_array", "fringe_eval",
    "periodogram", "loggam", "KIND_SIN2", "KIND_COS2", "KIND_COSINE",
]

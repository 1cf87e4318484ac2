"""Kernel dispatch: the compiled extension when importable, NumPy otherwise.

Set ``P2XSCHED_PURE_PYTHON=1`` to force the fallback.
"""
import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if not os.environ.get("P2XSCHED_PURE_PYTHON"):
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        _impl = _kernels_py

centered_moving_average = _impl.centered_moving_average
seasonal_profile = _impl.seasonal_profile
lag_matrix = _impl.lag_matrix
ar_predict = _impl.ar_predict

__all__ = ["BACKEND", "centered_moving_average", "seasonal_profile", "lag_matrix", "ar_predict"]

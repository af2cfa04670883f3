"""Hot numeric kernels with a numba path and a pure-numpy fallback.

The numba path is used when numba imports cleanly and the environment
variable ``ORDIFUN_DISABLE_JIT`` is unset (or ``0``).  Both paths expose
the same functions with identical semantics:

``bspline_design(knots, order, t, deriv)``
    (L, n_basis) matrix of B-spline values or derivatives.
``splitmix_bits(key, counters)``
    uint64 outputs of the counter-based SplitMix64 stream ``key``.
``inverse_normal(p)``
    Standard normal quantile (Wichura AS241) of probabilities in (0, 1).
``nearest_rows(points, centers)``
    Index of the closest center per point, first index on ties.
"""

import os
import warnings

from ordifun.kernels import _numpy

BACKEND = "numpy"


def _want_jit():
    flag = os.environ.get("ORDIFUN_DISABLE_JIT", "").strip().lower()
    return flag in ("", "0", "false", "no")


if _want_jit():
    try:
        from ordifun.kernels import _numba as _impl

        BACKEND = "numba"
    except ImportError:  # pragma: no cover - numba is a hard dependency
        warnings.warn("numba unavailable; using the numpy kernels")
        _impl = _numpy
else:
    _impl = _numpy

bspline_design = _impl.bspline_design
splitmix_bits = _impl.splitmix_bits
inverse_normal = _impl.inverse_normal
nearest_rows = _impl.nearest_rows

__all__ = [
    "BACKEND",
    "bspline_design",
    "splitmix_bits",
    "inverse_normal",
    "nearest_rows",
]

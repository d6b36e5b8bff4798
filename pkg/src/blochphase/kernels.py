"""Hot loops, compiled when available.

The Cython extension ``_kernels`` is used if it imports; otherwise the pure
Python reference in ``_kernels_py`` is used. Setting ``BLOCH_PURE_PYTHON=1``
forces the fallback.

``thermal_kernel`` always comes from the numpy implementation: its vectorized
``expm1``/``log1p`` beat the compiled per-element loop (see
``benchmarks/bench_kernels.py``). The compiled twin is kept for parity tests.
"""
import logging
import os

from . import _kernels_py
from ._kernels_py import CANONICAL, HEUN, OK, POLE, PRINTED, QUBIT, RANGE, RK4  # noqa: F401

log = logging.getLogger(__name__)

BACKEND = "python"
_impl = _kernels_py

if os.environ.get("BLOCH_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled
    except ImportError as exc:  # pragma: no cover - depends on the build
        log.debug("compiled kernels unavailable (%s); using pure Python", exc)
    else:
        _impl = _compiled
        BACKEND = "cython"

propagate = _impl.propagate
thermal_kernel = _kernels_py.thermal_kernel
neumaier_sum = _impl.neumaier_sum


def backends():
    """Mapping of every importable backend name to its module."""
    out = {"python": _kernels_py}
    try:
        from . import _kernels
    except ImportError:  # pragma: no cover
        pass
    else:
        out["cython"] = _kernels
    return out

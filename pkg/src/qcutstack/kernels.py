"""Backend selection for the hot loops.

The compiled extension is used when it imports; setting the environment
variable ``QCUTSTACK_PURE_PYTHON=1`` forces the pure Python fallback.
"""
import os

BACKEND = "python"
if os.environ.get("QCUTSTACK_PURE_PYTHON", "") != "1":
    try:
        from ._kernels import cycle_decompose, greedy_nearest, orbit_gauge
        BACKEND = "cython"
    except ImportError:  # extension not built
        pass
if BACKEND == "python":
    from ._kernels_py import cycle_decompose, greedy_nearest, orbit_gauge

__all__ = ["BACKEND", "cycle_decompose", "greedy_nearest", "orbit_gauge"]

"""Select the elementwise kernel backend at import time.

The compiled extension is preferred. Set ``MVKSC_PURE_PYTHON=1`` to force the
numpy fallback (useful for benchmarking and for checking the two agree).
"""
import os

if os.environ.get("MVKSC_PURE_PYTHON"):
    from mvksc import _pykernels as kernels

    BACKEND = "python"
else:
    try:
        from mvksc import _ckernels as kernels

        BACKEND = "cython"
    except ImportError:
        from mvksc import _pykernels as kernels

        BACKEND = "python"

prox_double_l1_matrix = kernels.prox_double_l1_matrix
consensus_l1_matrix = kernels.consensus_l1_matrix

__all__ = ["BACKEND", "prox_double_l1_matrix", "consensus_l1_matrix"]

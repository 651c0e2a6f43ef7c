"""Backend selection for the X-state key-rate kernel.

The Cython extension is used when it was built; otherwise, or when the
environment variable ``WLIKE_PURE_PYTHON`` is set, the NumPy version runs.
"""

import os

import numpy as np

from ._ext import xstate_py

try:
    from ._ext import xstate as _compiled
except ImportError:  # extension not built
    _compiled = None

BACKENDS = ("cython", "python") if _compiled is not None else ("python",)
DEFAULT_BACKEND = "python" if os.environ.get("WLIKE_PURE_PYTHON") or _compiled is None else "cython"


def xstate_dw(a, b, c, d, backend: str | None = None):
    """I(A:B) and I(A:E) in bits for X states with weights (a, b, b, d) and coherence c.

    Weights need not be normalized. Inputs broadcast against each other.
    """
    backend = backend or DEFAULT_BACKEND
    if backend not in BACKENDS:
        raise ValueError(f"backend {backend!r} unavailable; have {BACKENDS}")
    a, b, c, d = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (a, b, c, d)))
    shape = a.shape
    if backend == "python":
        i_ab, i_ae = xstate_py.xstate_dw(a, b, c, d)
    else:
        flat = [np.ascontiguousarray(v.ravel()) for v in (a, b, c, d)]
        i_ab, i_ae = _compiled.xstate_dw(*flat)
    return np.asarray(i_ab).reshape(shape), np.asarray(i_ae).reshape(shape)

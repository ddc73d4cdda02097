"""Backend selection for the elimination kernels.

The compiled extension is used when it has been built; set
``CONSTRUCTIBLE_PURE=1`` to force the pure-Python fallback.
"""
from __future__ import annotations

import os

if os.environ.get("CONSTRUCTIBLE_PURE"):
    from . import _kernels_py as _impl

    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        from . import _kernels_py as _impl

        BACKEND = "python"

rref_sparse = _impl.rref_sparse
rref_dense_modp = _impl.rref_dense_modp

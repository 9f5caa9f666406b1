"""Kernel backend selection.

Imports the compiled extension when it is built, the pure-Python twin
otherwise.  Set BLOCKEQ_PURE=1 to force the pure backend (used by the
benchmark and by differential tests).
"""

import os

if os.environ.get("BLOCKEQ_PURE"):
    from . import _kernels_py as _impl
else:
    try:
        from . import _kernels_c as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _kernels_py as _impl

BACKEND = _impl.BACKEND
mat_mul = _impl.mat_mul
row_add = _impl.row_add
col_add = _impl.col_add
row_negate = _impl.row_negate
col_negate = _impl.col_negate

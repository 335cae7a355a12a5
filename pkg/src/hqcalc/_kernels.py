"""Backend selection for the quadrature hot loop.

The compiled extension is preferred when it imported cleanly; setting
HQCALC_PURE=1 forces the NumPy fallback.  Both expose the same
``pencil_weighted_sums`` contract and agree to accumulation accuracy.
"""

import os

from . import _quadcore_py

if os.environ.get("HQCALC_PURE", "0") not in ("", "0"):
    _impl = _quadcore_py
    BACKEND = "python"
else:
    try:
        from . import _quadcore as _impl  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:
        _impl = _quadcore_py
        BACKEND = "python"

pencil_weighted_sums = _impl.pencil_weighted_sums


def backend_name():
    return BACKEND

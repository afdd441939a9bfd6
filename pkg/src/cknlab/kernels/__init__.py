"""Hot loops of the grid minimizer.

The compiled module is used when it imports; setting ``CKN_FORCE_PYTHON=1``
(or a failed build) selects the pure-Python fallback. ``BACKEND`` names the
active implementation.
"""
from __future__ import annotations

import os

from . import _fallback

if os.environ.get("CKN_FORCE_PYTHON", "") not in ("", "0"):
    _impl = _fallback
else:
    try:
        from . import _kernels as _impl
    except ImportError:
        _impl = _fallback

BACKEND = "compiled" if _impl is not _fallback else "python"
segment_terms = _impl.segment_terms
cd_sweep = _impl.cd_sweep

__all__ = ["BACKEND", "segment_terms", "cd_sweep"]

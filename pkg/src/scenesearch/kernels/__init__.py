"""Hot-kernel dispatch: compiled extension when available, numpy otherwise.

Set ``SCENESEARCH_PURE_PYTHON=1`` to force the fallback (used by the
backend-equivalence tests and the kernel benchmark).
"""

import os

from . import _fallback

if os.environ.get("SCENESEARCH_PURE_PYTHON") == "1":
    _impl = _fallback
    BACKEND = "python"
else:
    try:
        from . import _speedups as _impl

        BACKEND = "cython"
    except ImportError:
        _impl = _fallback
        BACKEND = "python"

frustum_masks = _impl.frustum_masks
info_gain_batch = _impl.info_gain_batch
frustum_info_gain = _impl.frustum_info_gain
kde_batch = _impl.kde_batch

__all__ = [
    "BACKEND",
    "frustum_masks",
    "info_gain_batch",
    "frustum_info_gain",
    "kde_batch",
    "_fallback",
]

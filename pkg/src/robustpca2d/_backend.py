"""Pick the kernel implementation at import time.

``ROBUSTPCA2D_BACKEND=python`` forces the numpy fallback; ``cython`` makes a
missing extension an error instead of a silent downgrade.
"""
import os

_requested = os.environ.get("ROBUSTPCA2D_BACKEND", "auto").lower()

if _requested == "python":
    from . import _fallback as kernels
    BACKEND = "python"
else:
    try:
        from . import _kernels as kernels
        BACKEND = "cython"
    except ImportError:
        if _requested == "cython":
            raise
        from . import _fallback as kernels
        BACKEND = "python"

__all__ = ["kernels", "BACKEND"]

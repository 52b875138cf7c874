"""Select the compiled kernels when built, otherwise the numpy fallback.

Set ``LCV_PURE_PYTHON=1`` to force the fallback.
"""
import os

BACKEND = "python"
if os.environ.get("LCV_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from ._ckernels import alternating, project  # noqa: F401
        BACKEND = "cython"
    except ImportError:
        pass
if BACKEND == "python":
    from ._pykernels import alternating, project  # noqa: F401

from ._pykernels import CONVERGED, DIVERGED, MAX_ITER  # noqa: E402,F401

"""Pick the compiled kernels when available, else the pure-Python fallback.

Set ``BIGAP_PURE_PYTHON=1`` to force the fallback.
"""

from __future__ import annotations

import os

from . import _fallback

if os.environ.get("BIGAP_PURE_PYTHON", "") not in ("", "0"):
    _compiled = None
else:
    try:
        from . import _kernels as _compiled
    except ImportError:
        _compiled = None

kernels = _compiled if _compiled is not None else _fallback
NAME = "cython" if _compiled is not None else "python"


def available() -> dict:
    """Backends importable in this process, keyed by name."""
    out = {"python": _fallback}
    try:
        from . import _kernels
    except ImportError:
        pass
    else:
        out["cython"] = _kernels
    return out

"""Pick the guess-loop implementation at import time.

The compiled kernel is used when it was built; set WEAKRING_PURE_PYTHON=1 to
force the numpy fallback.
"""

import os

from . import _scan_py

_compiled = None
if os.environ.get("WEAKRING_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _scan as _compiled
    except ImportError:  # extension not built
        _compiled = None

if _compiled is not None:
    scan_chunk = _compiled.scan_chunk
    BACKEND = "cython"
else:
    scan_chunk = _scan_py.scan_chunk
    BACKEND = "python"

scan_guesses = _scan_py.scan_guesses


def available_backends() -> dict:
    out = {"python": _scan_py.scan_chunk}
    if _compiled is not None:
        out["cython"] = _compiled.scan_chunk
    return out

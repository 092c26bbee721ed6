"""Hot-kernel backend selection.

The compiled Cython extension is used when importable; otherwise the pure
NumPy backend takes over with identical semantics. Override with
URCKIT_BACKEND=python or URCKIT_BACKEND=compiled (the latter raises if the
extension is missing).
"""

import os

_requested = os.environ.get("URCKIT_BACKEND", "auto")

if _requested not in ("auto", "compiled", "python"):
    raise RuntimeError(f"URCKIT_BACKEND must be auto|compiled|python, got {_requested!r}")

if _requested in ("auto", "compiled"):
    try:
        from . import _fast as _impl

        BACKEND = "compiled"
    except ImportError:
        if _requested == "compiled":
            raise
        from . import py_backend as _impl

        BACKEND = "python"
else:
    from . import py_backend as _impl

    BACKEND = "python"

aloha_chunk = _impl.aloha_chunk
aloha_saturated_chunk = _impl.aloha_saturated_chunk
peel = _impl.peel
rsc_walk = _impl.rsc_walk

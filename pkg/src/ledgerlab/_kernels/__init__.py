"""Split-kernel backend selection.

Prefers the compiled Cython extension; falls back to the numpy
implementation when the extension is missing or LEDGERLAB_PURE_PY is set.
Both produce bit-identical splits, so the choice only affects speed.
"""
import os

from . import _split_py

if os.environ.get("LEDGERLAB_PURE_PY"):
    _impl = _split_py
else:
    try:
        from . import _split as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _split_py

best_split_gini = _impl.best_split_gini
best_split_sse = _impl.best_split_sse


def kernel_backend() -> str:
    """Which split-kernel implementation is active: 'cython' or 'python'."""
    return _impl.BACKEND

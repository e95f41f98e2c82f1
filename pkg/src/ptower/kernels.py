"""Backend selection for the elimination kernels.

The compiled module is used when it imports; setting ``PTOWER_PURE_PYTHON=1``
forces the pure-Python fallback.
"""

import os

from . import _pykernels

if os.environ.get("PTOWER_PURE_PYTHON", "") not in ("", "0"):
    _impl = _pykernels
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl

        BACKEND = "compiled"
    except ImportError:  # pragma: no cover - depends on build
        _impl = _pykernels
        BACKEND = "python"


def howell(rows, p, n):
    """Howell normal form over Z/p^n; see ``_pykernels.howell``."""
    return _impl.howell(rows, p, n)


def rank_mod_p(rows, ncols, p):
    """Rank over F_p of a list of rows."""
    return _impl.rank_mod_p(rows, ncols, p)

"""Kernel backend selection.

Prefers the compiled Cython extension; falls back to pure numpy/python.
``BUNDLEKIT_PURE=1`` forces the fallback (used by the benchmark and the
backend-equivalence tests).
"""

from __future__ import annotations

import os

from . import pyfallback

if os.environ.get("BUNDLEKIT_PURE") == "1":
    _impl = pyfallback
else:
    try:
        from . import _ckern as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = pyfallback

BACKEND = _impl.BACKEND
bfs_row = _impl.bfs_row
bfs_multi = _impl.bfs_multi
bfs_masked = _impl.bfs_masked
bfs_rows_into = _impl.bfs_rows_into
bfs_many_int16 = _impl.bfs_many_int16
four_point_delta2 = _impl.four_point_delta2


def available_backends():
    out = {"python": pyfallback}
    try:
        from . import _ckern

        out["c"] = _ckern
    except ImportError:
        pass
    return out

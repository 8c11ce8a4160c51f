"""Backend selection for the hot loops.

The compiled extension is used when it imports; set ``CRYSTALLO_PURE_PYTHON=1``
to force the pure-Python twins.
"""

import os
from array import array

from . import _kernels_py

if os.environ.get("CRYSTALLO_PURE_PYTHON"):
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl
    except ImportError:
        _impl = _kernels_py

BACKEND = "python" if _impl is _kernels_py else "compiled"

hom_trigger = _impl.hom_trigger
hom_check_full = _impl.hom_check_full
find_violations = _impl.find_violations


def int_buffer(values=(), size=None, fill=-1):
    """An ``array('i')`` usable by both backends."""
    if size is not None:
        return array("i", [fill]) * size
    return array("i", values)


def row_coords(n, k):
    """Flattened coordinates of every row of ``{0..n-1}**k`` (row-major)."""
    total = n**k
    out = array("i", [0]) * (total * k)
    for row in range(total):
        x = row
        for i in range(k - 1, -1, -1):
            out[row * k + i] = x % n
            x //= n
    return out

"""Backend selection for the cycle-enumeration kernels.

The compiled extension is used when it was built; otherwise the pure-Python
module is imported.  Set ``LEAFSHIFT_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if not os.environ.get("LEAFSHIFT_PURE_PYTHON"):
    try:
        from . import _kernels as _compiled
    except ImportError:  # extension not built
        pass
    else:
        _impl = _compiled
        BACKEND = "compiled"

count_cycles = _impl.count_cycles
enumerate_cycles = _impl.enumerate_cycles
cycle_translation_sums = _impl.cycle_translation_sums

__all__ = [
    "BACKEND",
    "count_cycles",
    "enumerate_cycles",
    "cycle_translation_sums",
]

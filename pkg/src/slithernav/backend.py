"""Kernel backend selection.

The compiled extension is used when importable; the pure-numpy kernel is the
fallback (and the reference the extension is parity-tested against). Set
SLITHERNAV_PURE=1 to force the fallback.
"""

from __future__ import annotations

import os

from . import _kernel_py

if os.environ.get("SLITHERNAV_PURE", "") not in ("", "0"):
    kernel = _kernel_py
    HAS_NATIVE = False
else:
    try:
        from . import _core as kernel  # type: ignore[no-redef]

        HAS_NATIVE = True
    except ImportError:
        kernel = _kernel_py
        HAS_NATIVE = False

pure_kernel = _kernel_py


def backend_name() -> str:
    return kernel.NAME

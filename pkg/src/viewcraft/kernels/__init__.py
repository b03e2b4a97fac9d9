"""Per-pixel kernel core with backend selection at import time.

The compiled Cython module is preferred when present; the pure-numpy
fallback is bit-identical, so everything downstream is deterministic
regardless of which backend got picked.  Set ``VIEWCRAFT_KERNELS=py`` or
``=cy`` to force a backend (``cy`` raises if the extension is missing).
"""

from __future__ import annotations

import os

from . import _kernels_py

_force = os.environ.get("VIEWCRAFT_KERNELS", "auto").lower()

if _force in ("py", "python", "numpy"):
    _impl = _kernels_py
    BACKEND = "numpy"
elif _force in ("cy", "c", "compiled"):
    from . import _kernels_cy as _impl  # type: ignore[no-redef]
    BACKEND = "compiled"
else:
    try:
        from . import _kernels_cy as _impl  # type: ignore[no-redef]
        BACKEND = "compiled"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "numpy"

convex_mask = _impl.convex_mask
bilinear_resize = _impl.bilinear_resize
grad_mag_u8 = _impl.grad_mag_u8
hysteresis_u8 = _impl.hysteresis_u8
block_mean_u8 = _impl.block_mean_u8
feather_composite = _impl.feather_composite


def available_backends() -> dict:
    """Importable kernel modules by name (for parity tests and benchmarks)."""
    backends = {"numpy": _kernels_py}
    try:
        from . import _kernels_cy
        backends["compiled"] = _kernels_cy
    except ImportError:
        pass
    return backends

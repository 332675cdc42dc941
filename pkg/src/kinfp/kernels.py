"""Kernel backend selection.

Imports the compiled extension when it is present, otherwise the numpy
fallback.  Set KINFP_FORCE_FALLBACK=1 to force the fallback (used by the
parity tests and the benchmark).
"""

from __future__ import annotations

import os

from . import _kernels_py as fallback

if os.environ.get("KINFP_FORCE_FALLBACK", "") == "1":
    impl = fallback
else:
    try:
        from . import _kernels as impl  # type: ignore[no-redef]
    except ImportError:
        impl = fallback

BACKEND: str = impl.BACKEND

advect_apply = impl.advect_apply
thomas_many = impl.thomas_many
thomas_shared = impl.thomas_shared
particle_step = impl.particle_step

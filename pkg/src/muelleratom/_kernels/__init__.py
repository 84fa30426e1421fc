"""Hot numeric kernels with two interchangeable lanes.

The jitted lane (numba, default) and the reference lane (pure numpy) expose
identical signatures and agree to machine precision.  Set the environment
variable ``MUELLERATOM_DISABLE_NUMBA=1`` to force the reference lane, e.g. on
platforms where numba is unavailable or for debugging.
"""

import os

__all__ = [
    "BACKEND",
    "cumulative_integral",
    "coulomb_profile",
    "coulomb_profile_batch",
    "edge_defect_tridiag",
    "project_sqrt_box",
]


def _numba_disabled() -> bool:
    flag = os.environ.get("MUELLERATOM_DISABLE_NUMBA", "").strip().lower()
    return flag not in ("", "0", "false", "no")


if _numba_disabled():
    from . import reference as _impl

    BACKEND = "numpy"
else:
    try:
        from . import jitted as _impl

        BACKEND = "numba"
    except ImportError:  # numba missing: fall back silently
        from . import reference as _impl

        BACKEND = "numpy"

cumulative_integral = _impl.cumulative_integral
coulomb_profile = _impl.coulomb_profile
coulomb_profile_batch = _impl.coulomb_profile_batch
edge_defect_tridiag = _impl.edge_defect_tridiag
project_sqrt_box = _impl.project_sqrt_box

"""Hot-loop kernels with a compiled core and a pure-numpy fallback.

The compiled extension is selected at import time when present; otherwise
the numpy implementations are used.  ``BACKEND`` records which one is
active.  ``benchmarks/bench_kernels.py`` compares the two.
"""

try:
    from . import _core as _impl

    BACKEND = "compiled"
except ImportError:  # extension not built on this platform
    from . import fallback as _impl

    BACKEND = "fallback"

from . import fallback

dbm_drift = _impl.dbm_drift
dbm_drift_regularized = _impl.dbm_drift_regularized
coupled_coefficient_matrix = _impl.coupled_coefficient_matrix

__all__ = [
    "BACKEND",
    "dbm_drift",
    "dbm_drift_regularized",
    "coupled_coefficient_matrix",
    "fallback",
]

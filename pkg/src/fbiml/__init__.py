"""Numerical microlocal analysis for tube structures Z = x + i phi(t)."""

import os as _os

# FBIML_THREADS caps BLAS/OpenMP threads; it only takes effect before numpy loads.
_threads = _os.environ.get("FBIML_THREADS")
if _threads and _threads.isdigit() and int(_threads) > 0:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        _os.environ.setdefault(_var, _threads)

from .polymap import PolynomialMap  # noqa: E402
from .tube import Box, TubeStructure  # noqa: E402

__version__ = "0.1.0"

__all__ = ["Box", "PolynomialMap", "TubeStructure", "__version__"]

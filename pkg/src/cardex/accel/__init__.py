"""Hot numeric kernels with two interchangeable backends.

The numba backend (default) JIT-compiles the inner loops; setting the
environment variable ``CARDEX_NO_NUMBA=1`` selects the pure-numpy fallback.
Both backends expose the same functions with identical semantics; see
``benchmarks/bench_accel.py`` for a side-by-side timing comparison.
"""

import os

_flag = os.environ.get("CARDEX_NO_NUMBA", "").strip().lower()
if _flag in ("1", "true", "yes"):
    from . import numpy_impl as backend

    BACKEND = "numpy"
else:
    try:
        from . import numba_impl as backend

        BACKEND = "numba"
    except ImportError:  # pragma: no cover - numba is a declared dependency
        from . import numpy_impl as backend

        BACKEND = "numpy"

conv2d_reflect101 = backend.conv2d_reflect101
nms4 = backend.nms4
hysteresis8 = backend.hysteresis8
warp_bilinear = backend.warp_bilinear
levenshtein_u32 = backend.levenshtein_u32
best_quad = backend.best_quad

"""Backend selection for the hot window-counting kernel.

The compiled core is used when importable; set ARTIFACT_PURE=1 to force the
pure-Python path.
"""
from __future__ import annotations

import os
from typing import Optional, Sequence

import numpy as np

from . import _pykernels

_compiled = None
if os.environ.get("ARTIFACT_PURE") != "1":
    try:
        from . import _ckernels as _compiled  # type: ignore[no-redef]
    except ImportError:  # pragma: no cover - depends on the build
        _compiled = None

BACKEND = "cython" if _compiled is not None else "python"


def count_windows(seq: Sequence[int], bounds: Sequence[int], n: int,
                  weights: Optional[Sequence[int]] = None,
                  budget: int = -1, backend: Optional[str] = None) -> tuple[int, bool]:
    """Count distinct length-n windows of the segments seq[bounds[i]:bounds[i+1]].

    Returns (distinct, certified).  See the compiled module for semantics.
    """
    if n <= 0:
        raise ValueError("window length must be positive")
    use = backend or BACKEND
    if use == "cython":
        if _compiled is None:
            raise RuntimeError("compiled kernel not available")
        s = np.ascontiguousarray(seq, dtype=np.int32)
        b = np.ascontiguousarray(bounds, dtype=np.int64)
        w = None if weights is None else np.ascontiguousarray(weights, dtype=np.int32)
        return _compiled.count_windows(s, b, int(n), w, int(budget))
    return _pykernels.count_windows(seq, bounds, n, weights, budget)

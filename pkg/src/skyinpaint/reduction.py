"""Inner products whose rounding does not depend on element order.

Each product is split into three fixed-point slices (error-free extraction
against power-of-two anchors derived from the largest product), and every
slice is summed exactly. The result is therefore identical for any
permutation of the inputs and any thread count, and accurate to roughly
2**-65 relative to the largest product.
"""
from __future__ import annotations

import numpy as np

from . import _kernels


class NumericalBreakdown(ArithmeticError):
    """A non-finite value turned up inside an inner product."""


def reproducible_dot(x: np.ndarray, y: np.ndarray) -> float:
    x = np.ascontiguousarray(x, dtype=np.float64).reshape(-1)
    y = np.ascontiguousarray(y, dtype=np.float64).reshape(-1)
    if x.size != y.size:
        raise ValueError(f"length mismatch: {x.size} vs {y.size}")
    absmax, bad = _kernels.absmax_product(x, y)
    if bad:
        raise NumericalBreakdown("non-finite value in inner product")
    return float(_kernels.folded_dot(x, y, absmax))


def plain_dot(x: np.ndarray, y: np.ndarray) -> float:
    s = float(np.dot(x, y))
    if not np.isfinite(s):
        raise NumericalBreakdown("non-finite value in inner product")
    return s

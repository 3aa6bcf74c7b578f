"""Boundary-aware 5-point Laplacian and the inpainting system operator.

Production paths are matrix-free (numba kernels over the (height, width)
image). :func:`assemble_dense` builds the same operator explicitly from
:func:`~skyinpaint.grid.neighbor` and exists for tests and small reference
solves only.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .grid import DIRECTIONS, AngularGrid, InpaintingMask, PixelIndex, SignalField, neighbor

DENSE_ORACLE_LIMIT = 10_000


class OracleSizeError(ValueError):
    """Refusal to assemble a dense matrix for a large grid."""


@dataclass(frozen=True)
class LaplacianStencil:
    grid: AngularGrid
    inv_h_theta_sq: float
    inv_h_phi_sq: float

    def __post_init__(self):
        for name in ("inv_h_theta_sq", "inv_h_phi_sq"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be positive and finite, got {v}")

    @classmethod
    def for_grid(cls, grid: AngularGrid, h_theta: float | None = None,
                 h_phi: float | None = None) -> "LaplacianStencil":
        """Stencil with the grid's angular spacings unless overridden."""
        ht = grid.h_theta if h_theta is None else h_theta
        hp = grid.h_phi if h_phi is None else h_phi
        return cls(grid, 1.0 / (ht * ht), 1.0 / (hp * hp))


def laplacian_image(st: LaplacianStencil, u: np.ndarray) -> np.ndarray:
    """A u for a (height, width) float array."""
    u = np.ascontiguousarray(u, dtype=np.float64).reshape(st.grid.shape)
    out = np.empty_like(u)
    _kernels.laplacian(u, st.inv_h_theta_sq, st.inv_h_phi_sq, out)
    return out


def apply_laplacian(st: LaplacianStencil, u: SignalField) -> SignalField:
    st.grid.check_same(u.grid)
    return SignalField(st.grid, laplacian_image(st, u.as_image()))


def apply_system(st: LaplacianStencil, mask: InpaintingMask, u: SignalField) -> SignalField:
    """M u with M = C - (I - C) A: identity rows on known pixels."""
    st.grid.check_same(u.grid)
    st.grid.check_same(mask.grid)
    out = np.empty(st.grid.shape)
    _kernels.system(np.ascontiguousarray(u.as_image()), mask.as_image(),
                    st.inv_h_theta_sq, st.inv_h_phi_sq, out)
    return SignalField(st.grid, out)


def assemble_laplacian_dense(st: LaplacianStencil, limit: int = DENSE_ORACLE_LIMIT) -> np.ndarray:
    grid = st.grid
    n = grid.size
    if n > limit:
        raise OracleSizeError(f"dense assembly of {n}x{n} exceeds limit {limit}")
    weight = {"up": st.inv_h_theta_sq, "down": st.inv_h_theta_sq,
              "left": st.inv_h_phi_sq, "right": st.inv_h_phi_sq}
    a = np.zeros((n, n))
    for i in range(grid.height):
        for j in range(grid.width):
            p = PixelIndex(i, j)
            k = p.flat(grid)
            for d in DIRECTIONS:
                a[k, neighbor(grid, p, d).flat(grid)] += weight[d]
                a[k, k] -= weight[d]
    return a


def assemble_dense(st: LaplacianStencil, mask: InpaintingMask,
                   limit: int = DENSE_ORACLE_LIMIT) -> np.ndarray:
    """Explicit M = C - (I - C) A as an N x N array."""
    st.grid.check_same(mask.grid)
    a = assemble_laplacian_dense(st, limit)
    c = mask.known.astype(np.float64)
    return np.diag(c) - (1.0 - c)[:, None] * a

import numpy as np
import pytest

from skyinpaint.grid import AngularGrid, GridMismatchError, InpaintingMask, SignalField
from skyinpaint.laplacian import (LaplacianStencil, OracleSizeError, apply_laplacian, apply_system,
                                  assemble_dense, assemble_laplacian_dense, laplacian_image)


def unit_stencil(w, h):
    return LaplacianStencil.for_grid(AngularGrid(w, h), h_theta=1.0, h_phi=1.0)


def test_constant_field_is_harmonic():
    grid = AngularGrid(6, 4)
    out = apply_laplacian(LaplacianStencil.for_grid(grid), SignalField.full(grid, 7.0))
    assert np.all(out.values == 0.0)


def test_interior_impulse():
    st = unit_stencil(4, 5)
    u = np.zeros((5, 4))
    u[2, 1] = 1.0
    out = apply_laplacian(st, SignalField(st.grid, u)).as_image()
    expected = np.zeros((5, 4))
    expected[2, 1] = -4.0
    for i, j in [(1, 1), (3, 1), (2, 0), (2, 2)]:
        expected[i, j] = 1.0
    assert np.array_equal(out, expected)


def test_azimuthal_cosine_against_dense_product():
    st = unit_stencil(8, 4)
    j = np.arange(8)
    u = np.tile(np.cos(2 * np.pi * j / 8), (4, 1))
    dense = assemble_laplacian_dense(st) @ u.reshape(-1)
    out = laplacian_image(st, u)
    np.testing.assert_allclose(out.reshape(-1), dense, rtol=0, atol=1e-14)
    # below the zenith row the elevation term cancels exactly
    np.testing.assert_allclose(out[:-1], (2 * np.cos(2 * np.pi / 8) - 2) * u[:-1], atol=1e-14)


def test_system_all_known_is_identity(rng):
    grid = AngularGrid(4, 5)
    st = LaplacianStencil.for_grid(grid)
    u = SignalField(grid, rng.standard_normal(grid.size))
    out = apply_system(st, InpaintingMask(grid, np.ones(grid.size, bool)), u)
    assert np.array_equal(out.values, u.values)


def test_system_all_unknown_is_negative_laplacian(rng):
    grid = AngularGrid(4, 5)
    st = LaplacianStencil.for_grid(grid)
    u = SignalField(grid, rng.standard_normal(grid.size))
    out = apply_system(st, InpaintingMask.empty(grid), u)
    assert np.array_equal(out.values, -apply_laplacian(st, u).values)


def test_system_matches_dense_mixed_mask(rng):
    grid = AngularGrid(4, 5)
    st = LaplacianStencil.for_grid(grid)
    mask = InpaintingMask(grid, rng.random(grid.size) < 0.4)
    u = rng.standard_normal(grid.size)
    dense = assemble_dense(st, mask) @ u
    out = apply_system(st, mask, SignalField(grid, u)).values
    np.testing.assert_allclose(out, dense, rtol=0, atol=1e-13 * np.abs(u).max() * (st.inv_h_theta_sq + st.inv_h_phi_sq))


@pytest.mark.parametrize("w,h", [(2, 2), (4, 5), (8, 6), (12, 9), (20, 30), (50, 40)])
def test_matrix_free_equals_dense(rng, w, h):
    grid = AngularGrid(w, h)
    st = LaplacianStencil.for_grid(grid)
    mask = InpaintingMask(grid, rng.random(grid.size) < 0.3)
    u = rng.standard_normal(grid.size)
    dense = assemble_dense(st, mask) @ u
    out = apply_system(st, mask, SignalField(grid, u)).values
    # roundoff scales with the largest stencil coefficient
    scale = max(1.0, 2 * (st.inv_h_theta_sq + st.inv_h_phi_sq))
    assert np.abs(out - dense).max() <= 1e-13 * np.abs(u).max() * scale


def test_dense_examples():
    grid = AngularGrid(4, 5)
    st = LaplacianStencil.for_grid(grid)
    assert np.array_equal(assemble_dense(st, InpaintingMask(grid, np.ones(20, bool))), np.eye(20))
    m = assemble_dense(st, InpaintingMask.empty(grid))
    assert np.abs(m.sum(axis=1)).max() <= 1e-12
    assert np.array_equal(m, -assemble_laplacian_dense(st))


def test_dense_refuses_large_grid():
    with pytest.raises(OracleSizeError):
        assemble_laplacian_dense(LaplacianStencil.for_grid(AngularGrid(200, 60)))
    with pytest.raises(ValueError):
        AngularGrid(2, 1)


@pytest.mark.parametrize("w,h", [(4, 5), (8, 6), (12, 12), (2, 7)])
def test_dense_laplacian_is_symmetric(w, h, rng):
    st = LaplacianStencil.for_grid(AngularGrid(w, h), h_theta=rng.uniform(0.1, 2), h_phi=rng.uniform(0.1, 2))
    a = assemble_laplacian_dense(st)
    assert np.array_equal(a, a.T)


@pytest.mark.parametrize("w,h", [(4, 5), (8, 6), (12, 9), (12, 12), (10, 3)])
def test_inner_product_symmetry(w, h, rng):
    st = LaplacianStencil.for_grid(AngularGrid(w, h), h_theta=rng.uniform(0.05, 1), h_phi=rng.uniform(0.05, 1))
    for _ in range(20):
        x, y = rng.standard_normal((2, h, w))
        lhs = np.vdot(laplacian_image(st, x), y)
        rhs = np.vdot(x, laplacian_image(st, y))
        assert abs(lhs - rhs) <= 1e-12 * max(abs(lhs), abs(rhs), 1.0)


def test_azimuthal_equivariance_bitwise(rng):
    grid = AngularGrid(16, 9)
    st = LaplacianStencil.for_grid(grid)
    u = rng.standard_normal(grid.shape)
    base = laplacian_image(st, u)
    for k in range(16):
        assert np.array_equal(laplacian_image(st, np.roll(u, k, axis=1)), np.roll(base, k, axis=1))


def test_grid_mismatch_raises():
    st = LaplacianStencil.for_grid(AngularGrid(4, 5))
    with pytest.raises(GridMismatchError):
        apply_laplacian(st, SignalField.full(AngularGrid(4, 6), 0.0))


def test_stencil_rejects_bad_coefficients():
    with pytest.raises(ValueError):
        LaplacianStencil(AngularGrid(4, 5), 0.0, 1.0)
    with pytest.raises(ValueError):
        LaplacianStencil(AngularGrid(4, 5), 1.0, float("inf"))

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from atflow import Grid, GridError

from conftest import dense_gradient_matrices, dense_lumped_weights


def test_grid_validation():
    with pytest.raises(GridError):
        Grid(1, 4)
    with pytest.raises(GridError):
        Grid(4, 4, lx=0.0)
    with pytest.raises(GridError):
        Grid(4, 4, ly=float("nan"))
    g = Grid(5, 3, 2.0, 1.0)
    assert g.hx == 0.5 and g.hy == 0.5


def test_constant_field_has_zero_gradient():
    grid = Grid(7, 5)
    gx, gy = grid.gradient(np.full(grid.shape, 3.7))
    assert np.all(gx == 0) and np.all(gy == 0)


def test_affine_field_exact():
    grid = Grid(9, 6, 1.0, 1.0)
    X, _ = grid.coords()
    gx, gy = grid.gradient(X)
    np.testing.assert_allclose(gx, 1.0, rtol=0, atol=1e-13)
    np.testing.assert_allclose(gy, 0.0, atol=1e-13)


def test_gradient_matches_dense_stencil(rng):
    grid = Grid(3, 3)
    Gx, Gy = dense_gradient_matrices(grid)
    f = rng.standard_normal(grid.shape)
    gx, gy = grid.gradient(f)
    np.testing.assert_allclose(gx.ravel(), Gx @ f.ravel(), atol=1e-13)
    np.testing.assert_allclose(gy.ravel(), Gy @ f.ravel(), atol=1e-13)


def test_gradient_rejects_bad_shape():
    with pytest.raises(GridError):
        Grid(4, 4).gradient(np.zeros((3, 4)))
    with pytest.raises(GridError):
        Grid(4, 4).divergence_adjoint(np.zeros((3, 3)), np.zeros((2, 3)))


def test_divergence_of_zero():
    grid = Grid(4, 5)
    z = np.zeros(grid.cell_shape)
    assert np.all(grid.divergence_adjoint(z, z) == 0)


def test_adjoint_identity(rng):
    grid = Grid(4, 5, 1.3, 0.7)
    for _ in range(20):
        f = rng.standard_normal(grid.shape)
        vx, vy = rng.standard_normal((2,) + grid.cell_shape)
        lhs = grid.mass_inner(grid.divergence_adjoint(vx, vy), f)
        rhs = grid.cell_inner((vx, vy), grid.gradient(f))
        assert abs(lhs + rhs) <= 1e-12


def test_divergence_of_harmonic_gradient_is_small():
    grid = Grid(64, 64)
    X, Y = grid.coords()
    d = grid.divergence_adjoint(*grid.gradient(X * Y))
    assert np.abs(d[1:-1, 1:-1]).max() <= 1.0 * grid.h


def test_lumped_weights():
    grid = Grid(6, 4, 2.5, 1.5)
    np.testing.assert_allclose(grid.weights.ravel(), dense_lumped_weights(grid), rtol=1e-15)
    assert grid.weights.sum() == pytest.approx(grid.lx * grid.ly, rel=1e-15)


def test_mass_norm_values():
    grid = Grid(11, 11)
    assert grid.mass_norm(np.ones(grid.shape)) == pytest.approx(1.0, rel=1e-14)
    assert grid.mass_norm(np.zeros(grid.shape)) == 0.0
    fine = Grid(129, 129)
    X, _ = fine.coords()
    assert abs(fine.mass_norm(X) ** 2 - 1.0 / 3.0) <= 1e-3


def test_cell_integral():
    grid = Grid(5, 9, 2.0, 3.0)
    assert grid.cell_integral(np.ones(grid.cell_shape)) == pytest.approx(6.0)


@settings(max_examples=30, deadline=None)
@given(nx=st.integers(2, 7), ny=st.integers(2, 7), a=st.floats(-3, 3), b=st.floats(-3, 3),
       seed=st.integers(0, 2**31))
def test_gradient_linear(nx, ny, a, b, seed):
    grid = Grid(nx, ny, 1.0 + nx / 10, 1.0)
    rng = np.random.default_rng(seed)
    f, g = rng.standard_normal((2, ny, nx))
    lhs = grid.gradient(a * f + b * g)
    fx, fy = grid.gradient(f)
    gx, gy = grid.gradient(g)
    scale = 1 + abs(a) + abs(b)
    np.testing.assert_allclose(lhs[0], a * fx + b * gx, atol=1e-12 * scale / grid.h)
    np.testing.assert_allclose(lhs[1], a * fy + b * gy, atol=1e-12 * scale / grid.h)

import numpy as np
import pytest

from atflow import Grid, SolverError, UOperator, make_params, solve_u_step
from atflow.energy import grad_u, total_energy

from conftest import dense_gradient_matrices, random_instance


def dense_u_system(params, rho, delta):
    """Assemble (1/delta + beta) W + G^T C G by hand and the matching rhs weights."""
    grid = params.grid
    Gx, Gy = dense_gradient_matrices(grid)
    rho = rho.ravel().reshape(grid.shape)
    rb = 0.25 * (rho[:-1, :-1] + rho[:-1, 1:] + rho[1:, :-1] + rho[1:, 1:])
    C = np.diag(grid.hx * grid.hy * (params.eta + rb.ravel() ** 2))
    w = grid.weights.ravel()
    A = (1.0 / delta + params.beta) * np.diag(w) + Gx.T @ C @ Gx + Gy.T @ C @ Gy
    return A, w


def test_matches_dense_direct_solve(rng):
    grid = Grid(6, 6, 1.0, 1.2)
    for _ in range(20):
        prm, u_prev, rho = random_instance(rng, grid, beta=rng.uniform(0, 5))
        delta = 10 ** rng.uniform(-4, -1)
        A, w = dense_u_system(prm, rho, delta)
        b = w * (u_prev.ravel() / delta + prm.beta * prm.g.ravel())
        exact = np.linalg.solve(A, b)
        u, rep = solve_u_step(u_prev, rho, delta, prm)
        assert rep.converged and rep.relative_residual <= 1e-10
        assert np.linalg.norm(u.ravel() - exact) <= 1e-9 * np.linalg.norm(exact)


def test_stationary_constant():
    grid = Grid(8, 7)
    prm = make_params(0.1, 0.01, 4, 2.0, np.full(grid.shape, 0.6), grid)
    rho = np.random.default_rng(0).random(grid.shape)
    u, rep = solve_u_step(np.full(grid.shape, 0.6), rho, 1e-2, prm)
    assert rep.iterations == 0
    np.testing.assert_allclose(u, 0.6, rtol=1e-15)


def test_constant_balance():
    grid = Grid(8, 7)
    c1, c2, beta, delta = 0.9, -0.3, 4.0, 0.05
    prm = make_params(0.1, 0.01, 4, beta, np.full(grid.shape, c2), grid)
    rho = np.random.default_rng(1).random(grid.shape)
    u, _ = solve_u_step(np.full(grid.shape, c1), rho, delta, prm, cg_tol=1e-14)
    expected = (c1 / delta + beta * c2) / (1 / delta + beta)
    np.testing.assert_allclose(u, expected, rtol=0, atol=1e-12)


def test_euler_lagrange_residual(rng):
    grid = Grid(12, 9)
    prm, u_prev, rho = random_instance(rng, grid)
    delta = 1e-2
    u, _ = solve_u_step(u_prev, rho, delta, prm)
    res = grad_u(u, rho, prm) + (u - u_prev) / delta
    assert grid.mass_norm(res) <= 1e-8 * grid.mass_norm(u_prev / delta + prm.beta * prm.g)


def test_energy_descent_and_max_principle(rng):
    grid = Grid(16, 16)
    for _ in range(5):
        prm, u_prev, rho = random_instance(rng, grid)
        delta = 0.03
        u, _ = solve_u_step(u_prev, rho, delta, prm)
        lhs = total_energy(u, rho, prm).total + grid.mass_norm(u - u_prev) ** 2 / (2 * delta)
        rhs = total_energy(u_prev, rho, prm).total
        assert lhs <= rhs + 1e-10 * rhs
        bound = max(np.abs(u_prev).max(), np.abs(prm.g).max())
        assert np.abs(u).max() <= bound + 1e-10


def test_operator_spd_in_mass_product(rng):
    grid = Grid(9, 7)
    prm, _, rho = random_instance(rng, grid)
    delta = 0.1
    op = UOperator.for_step(rho, delta, prm)
    shift = 1 / delta + prm.beta
    for _ in range(10):
        v, w = rng.standard_normal((2,) + grid.shape)
        assert grid.mass_inner(op(v), v) >= shift * grid.mass_norm(v) ** 2 * (1 - 1e-12)
        assert grid.mass_inner(op(v), w) == pytest.approx(grid.mass_inner(v, op(w)), rel=1e-12)


def test_rejects_nonpositive_delta(rng):
    grid = Grid(4, 4)
    prm, u, rho = random_instance(rng, grid)
    with pytest.raises(ValueError, match="delta"):
        solve_u_step(u, rho, 0.0, prm)


def test_non_convergence_raises_with_report(rng):
    grid = Grid(10, 10)
    prm, u, rho = random_instance(rng, grid)
    with pytest.raises(SolverError) as info:
        solve_u_step(u, rho, 1e3, prm, cg_tol=1e-14, max_iter=2)
    assert info.value.report.iterations == 2
    assert not info.value.report.converged

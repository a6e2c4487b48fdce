import numpy as np
import pytest

from atflow import Grid, make_params


def dense_gradient_matrices(grid: Grid):
    """Gx, Gy built entry by entry from the cell stencil (independent of Grid.gradient)."""
    nc = (grid.nx - 1) * (grid.ny - 1)
    n = grid.nx * grid.ny
    Gx = np.zeros((nc, n))
    Gy = np.zeros((nc, n))

    def node(j, i):
        return j * grid.nx + i

    for j in range(grid.ny - 1):
        for i in range(grid.nx - 1):
            c = j * (grid.nx - 1) + i
            for jj in (j, j + 1):
                Gx[c, node(jj, i + 1)] += 0.5 / grid.hx
                Gx[c, node(jj, i)] -= 0.5 / grid.hx
            for ii in (i, i + 1):
                Gy[c, node(j + 1, ii)] += 0.5 / grid.hy
                Gy[c, node(j, ii)] -= 0.5 / grid.hy
    return Gx, Gy


def dense_lumped_weights(grid: Grid):
    w = np.zeros((grid.ny, grid.nx))
    for j in range(grid.ny - 1):
        for i in range(grid.nx - 1):
            for jj, ii in ((j, i), (j, i + 1), (j + 1, i), (j + 1, i + 1)):
                w[jj, ii] += 0.25 * grid.hx * grid.hy
    return w.ravel()


def bisect_root(fun, lo, hi, tol=1e-15):
    flo = fun(lo)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fm = fun(mid)
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
        if hi - lo < tol:
            break
    return 0.5 * (lo + hi)


def random_instance(rng, grid, epsilon=0.3, eta=0.01, p=4.0, beta=2.0):
    g = rng.random(grid.shape)
    params = make_params(epsilon, eta, p, beta, g, grid)
    u = rng.random(grid.shape)
    rho = rng.uniform(0.05, 0.95, grid.shape)
    return params, u, rho


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

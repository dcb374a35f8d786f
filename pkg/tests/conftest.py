"""Shared dense/brute-force oracles, deliberately independent of the fast paths."""

import numpy as np
import pytest

from levyfit.forward import CCOperator, JumpKernel
from levyfit.torus import SplineBasis, TorusGrid, project_to_torus


def dense_cc_matrix(cc: CCOperator) -> np.ndarray:
    """The periodic flux operator assembled entry by entry."""
    n = cc.grid.n
    h = cc.grid.h
    a = np.zeros((n, n))
    for i in range(n):
        a[i, i] = -(cc.beta + cc.beta_omega) / h
        a[i, (i - 1) % n] = cc.beta / h
        a[i, (i + 1) % n] = cc.beta_omega / h
    return a


def brute_jump_apply(f: np.ndarray, rates, basis: SplineBasis,
                     grid: TorusGrid) -> np.ndarray:
    """Direct double sum over hats and quadrature nodes.

    Evaluates h * sum_j rates_j * sum_k hat_j(s_k) * f(x_i - s_k) - a * f_i
    with s_k the grid points and f continued periodically; needs the grid
    origin to be node-aligned so x_i - s_k lands exactly on the mesh.
    """
    rates = np.asarray(rates, dtype=float)
    pts = grid.points
    h = grid.h
    hats = basis.evaluate(pts)          # (n_theta, n)
    weights = h * rates @ hats
    total = weights.sum()
    out = np.empty_like(f)
    for i in range(grid.n):
        acc = 0.0
        for k in range(grid.n):
            y = project_to_torus(pts[i] - pts[k], grid)
            j = int(round((y - grid.lower) / h)) % grid.n
            acc += weights[k] * f[j]
        out[i] = acc - total * f[i]
    return out


def dense_jump_matrix(rates, basis: SplineBasis, grid: TorusGrid) -> np.ndarray:
    eye = np.eye(grid.n)
    return np.column_stack([brute_jump_apply(eye[:, j], rates, basis, grid)
                            for j in range(grid.n)])


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_density(rng, grid: TorusGrid) -> np.ndarray:
    f = rng.uniform(0.05, 1.0, grid.n)
    return f / (grid.h * f.sum())

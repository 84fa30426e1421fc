import numpy as np
import pytest

from muelleratom.errors import InvalidRangeError, LengthMismatchError
from muelleratom.grid import (
    build_log_grid,
    integrate,
    kinetic_matrix,
    lowest_eigenpairs,
)


def test_two_point_grid_is_geometric_endpoints():
    g = build_log_grid(1e-4, 40.0, 2)
    assert np.allclose(g.nodes, [1e-4, 40.0])


def test_geometric_spacing_constant_ratio():
    g = build_log_grid(1e-4, 40.0, 600)
    ratios = g.nodes[1:] / g.nodes[:-1]
    assert np.max(np.abs(ratios - np.exp(g.delta))) < 1e-12


def test_invalid_ranges_rejected():
    with pytest.raises(InvalidRangeError):
        build_log_grid(-1.0, 40.0, 100)
    with pytest.raises(InvalidRangeError):
        build_log_grid(2.0, 1.0, 100)
    with pytest.raises(InvalidRangeError):
        build_log_grid(1e-4, 40.0, 7)


def test_quadrature_exact_for_constants():
    for spec in [(1e-4, 40.0, 2), (1e-6, 60.0, 1200), (1.0, 2.0, 400)]:
        g = build_log_grid(*spec)
        total = integrate(g, np.ones(g.n_points))
        assert abs(total - (g.r_max - g.r_min)) < 1e-10 * (g.r_max - g.r_min)


def test_integrate_zero_and_length_check(grid_fine):
    assert integrate(grid_fine, np.zeros(grid_fine.n_points)) == 0.0
    with pytest.raises(LengthMismatchError):
        integrate(grid_fine, np.zeros(3))


def test_integrate_linear_on_unit_interval():
    g = build_log_grid(1.0, 2.0, 400)
    assert abs(integrate(g, g.nodes) - 1.5) < 1e-8


def test_integrate_exponential(grid_fine):
    # analytic oracle restricted to the mesh support: the head below r_min
    # carries ~1e-6 of the full half-line integral, beyond the mesh's reach
    val = integrate(grid_fine, np.exp(-grid_fine.nodes))
    exact = np.exp(-grid_fine.r_min) - np.exp(-grid_fine.r_max)
    assert abs(val - exact) < 1e-8


def test_integrate_hydrogen_density(grid_fine):
    r = grid_fine.nodes
    assert abs(integrate(grid_fine, 4 * r**2 * np.exp(-2 * r)) - 1.0) < 1e-8


def test_kinetic_matrix_shape_and_symmetry(grid_coarse):
    op = kinetic_matrix(grid_coarse, 0)
    mat = op.matrix
    assert mat.shape == (grid_coarse.n_points,) * 2
    # entrywise symmetric by construction
    assert np.array_equal(mat, mat.T)
    assert np.all(op.offdiag <= 0)
    with pytest.raises(InvalidRangeError):
        kinetic_matrix(grid_coarse, -1)


def test_kinetic_linearity_on_zero(grid_coarse):
    op = kinetic_matrix(grid_coarse, 0)
    assert np.all(op.apply_q(np.zeros(grid_coarse.n_points)) == 0.0)


@pytest.mark.parametrize(
    "ell, level, exact",
    [(0, 0, -0.25), (1, 0, -1.0 / 16.0), (0, 1, -1.0 / 16.0)],
)
def test_hydrogen_levels(hydrogen_default_grid, ell, level, exact):
    op = kinetic_matrix(hydrogen_default_grid, ell)
    vals, _ = lowest_eigenpairs(op, -1.0 / hydrogen_default_grid.nodes, level + 1)
    assert abs(vals[level] - exact) < 1e-4


@pytest.mark.parametrize("Z", [1.0, 2.0])
@pytest.mark.parametrize("ell", [0, 1, 2])
def test_hydrogenic_spectrum_and_convergence_order(Z, ell):
    # r_min deep enough that the O(r_min) wall error of s-states sits far
    # below the second-order mesh term, which delta halving then exposes
    exacts = [-(Z**2) / (4.0 * (ell + j + 1) ** 2) for j in range(2)]
    errs = []
    for n in (700, 1400):
        g = build_log_grid(1e-7 / Z, 220.0 / Z, n)
        op = kinetic_matrix(g, ell)
        vals, _ = lowest_eigenpairs(op, -Z / g.nodes, 2)
        errs.append([vals[j] - exacts[j] for j in range(2)])
    for j in range(2):
        assert abs(errs[1][j]) < 1e-4
        ratio = abs(errs[0][j]) / max(abs(errs[1][j]), 1e-14)
        assert 2.0 < ratio < 8.0  # halving delta shrinks the error ~4x


def test_eigenvectors_normalized(hydrogen_default_grid):
    op = kinetic_matrix(hydrogen_default_grid, 0)
    _, orbs = lowest_eigenpairs(op, -1.0 / hydrogen_default_grid.nodes, 3)
    for u in orbs:
        assert abs(integrate(hydrogen_default_grid, u * u) - 1.0) < 1e-12


def test_grid_determinism():
    a = build_log_grid(1e-5, 60.0, 500)
    b = build_log_grid(1e-5, 60.0, 500)
    assert np.array_equal(a.nodes, b.nodes)
    assert np.array_equal(a.weights, b.weights)
    ka = kinetic_matrix(a, 2)
    kb = kinetic_matrix(b, 2)
    assert np.array_equal(ka.diag, kb.diag)
    assert np.array_equal(ka.offdiag, kb.offdiag)

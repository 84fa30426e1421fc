"""The two kernel lanes must agree to machine precision."""

import numpy as np

from muelleratom._kernels import BACKEND, jitted, reference
from muelleratom.grid import build_log_grid


def test_backend_selected():
    assert BACKEND in ("numba", "numpy")


def test_lanes_agree_cumulative(rng):
    g = build_log_grid(1e-4, 50.0, 300)
    for _ in range(5):
        f = rng.normal(size=g.n_points)
        a = reference.cumulative_integral(g.interval_coeffs, g.interval_starts, f)
        b = jitted.cumulative_integral(g.interval_coeffs, g.interval_starts, f)
        assert np.max(np.abs(a - b)) < 1e-13 * max(1.0, np.max(np.abs(a)))


def test_lanes_agree_profiles(rng):
    g = build_log_grid(1e-4, 50.0, 300)
    for k in (0.0, 1.0, 3.0):
        p = np.abs(rng.normal(size=g.n_points)) * np.exp(-g.nodes)
        a = reference.coulomb_profile(g.nodes, g.interval_coeffs, g.interval_starts, p, k)
        b = jitted.coulomb_profile(g.nodes, g.interval_coeffs, g.interval_starts, p, k)
        scale = np.max(np.abs(a))
        assert np.max(np.abs(a - b)) < 1e-12 * scale


def test_lanes_agree_batch(rng):
    g = build_log_grid(1e-4, 50.0, 300)
    P = np.abs(rng.normal(size=(7, g.n_points))) * np.exp(-g.nodes)
    for k in (0.0, 2.0):
        a = reference.coulomb_profile_batch(
            g.nodes, g.interval_coeffs, g.interval_starts, P, k
        )
        b = jitted.coulomb_profile_batch(
            g.nodes, g.interval_coeffs, g.interval_starts, P, k
        )
        assert np.max(np.abs(a - b)) < 1e-12 * np.max(np.abs(a))
    # rows match the single-profile kernel
    single = reference.coulomb_profile(
        g.nodes, g.interval_coeffs, g.interval_starts, P[3], 2.0
    )
    assert np.allclose(a[3], single, rtol=0, atol=1e-12 * np.max(np.abs(single)))


def test_lanes_agree_edge_defect(rng):
    off = -np.abs(rng.normal(size=99))
    gamma_edge = rng.normal(size=99)
    df2 = np.abs(rng.normal(size=99))
    a = reference.edge_defect_tridiag(off, gamma_edge, df2)
    b = jitted.edge_defect_tridiag(off, gamma_edge, df2)
    assert abs(a - b) < 1e-12 * max(1.0, abs(a))


def test_lanes_agree_projection(rng):
    for _ in range(25):
        dim = int(rng.integers(3, 40))
        y = np.abs(rng.normal(size=dim))
        d = rng.choice([1.0, 3.0, 5.0, 7.0], size=dim)
        n_target = float(rng.uniform(0.3, 0.9)) * float(np.sum(d))
        a = reference.project_sqrt_box(y, d, n_target)
        b = jitted.project_sqrt_box(y, d, n_target)
        assert np.max(np.abs(a - b)) < 1e-10
        assert abs(np.sum(d * a * a) - n_target) < 1e-9 * max(1.0, n_target)

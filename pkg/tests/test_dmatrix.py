import numpy as np
import pytest

from muelleratom.coulomb import Potential
from muelleratom.dmatrix import (
    Channel,
    NaturalOrbitalEnsemble,
    angular_coefficient,
    build_exchange_table,
    density_of,
    exchange_energy,
    hartree_energy,
    legendre_triple_product,
    mueller_energy,
    rhf_energy,
    slater_integral,
)
from muelleratom.grid import integrate, kinetic_matrix, lowest_eigenpairs


def single_orbital(grid, u, n=1.0, ell=0):
    return NaturalOrbitalEnsemble(
        grid=grid,
        channels=[Channel(ell=ell, occupations=np.array([n]), orbitals=u[None, :])],
    )


def normalized(grid, u):
    return u / np.sqrt(integrate(grid, u * u))


def u_1s(grid):
    return 2.0 * grid.nodes * np.exp(-grid.nodes)


def random_s_orbital(grid, rng):
    r = grid.nodes
    u = np.zeros_like(r)
    for _ in range(3):
        a = rng.uniform(0.4, 3.0)
        u += rng.uniform(0.2, 1.0) * r * np.exp(-a * r)
    return normalized(grid, u)


def test_empty_ensemble(grid_fine):
    ens = NaturalOrbitalEnsemble(grid=grid_fine, channels=[])
    rho = density_of(ens)
    assert rho.total_charge == 0.0
    eb = mueller_energy(ens, 1.0)
    assert eb.total == 0.0 and eb.kinetic == 0.0


def test_density_normalization(grid_fine):
    ens = single_orbital(grid_fine, u_1s(grid_fine))
    assert abs(density_of(ens).total_charge - 1.0) < 1e-8


def test_degeneracy_bookkeeping(grid_fine):
    r = grid_fine.nodes
    u1 = normalized(grid_fine, r**2 * np.exp(-r))
    u2 = normalized(grid_fine, r**2 * np.exp(-1.7 * r) * (1 - 0.4 * r))
    # orthonormalize within the channel
    u2 = normalized(grid_fine, u2 - integrate(grid_fine, u1 * u2 * 1.0) * u1)
    gram = integrate(grid_fine, u1 * u2)
    u2 = normalized(grid_fine, u2 - gram * u1)
    ens = NaturalOrbitalEnsemble(
        grid=grid_fine,
        channels=[
            Channel(ell=1, occupations=np.array([1.0, 1.0]), orbitals=np.vstack([u1, u2]))
        ],
    )
    assert abs(density_of(ens).total_charge - 6.0) < 1e-8
    assert abs(ens.trace - 6.0) < 1e-12


def test_hartree_oracle_values(grid_fine):
    from muelleratom.coulomb import RadialDensity

    zero = RadialDensity(grid=grid_fine, values=np.zeros(grid_fine.n_points))
    assert hartree_energy(zero) == 0.0
    rho = density_of(single_orbital(grid_fine, u_1s(grid_fine)))
    assert abs(hartree_energy(rho) - 5.0 / 16.0) < 1e-6
    doubled = RadialDensity(grid=grid_fine, values=2 * rho.values)
    assert abs(hartree_energy(doubled) - 4 * hartree_energy(rho)) < 1e-10


def test_hartree_oracle_symbolic():
    # independent symbolic evaluation of the 1s Coulomb self-energy
    sympy = pytest.importorskip("sympy")
    r, s = sympy.symbols("r s", positive=True)
    q = 4 * r**2 * sympy.exp(-2 * r)
    qs = q.subs(r, s)
    inner = sympy.integrate(qs, (s, 0, r))
    outer = sympy.integrate(qs / s, (s, r, sympy.oo))
    val = sympy.integrate(q * (inner / r + outer), (r, 0, sympy.oo)) / 2
    assert sympy.simplify(val - sympy.Rational(5, 16)) == 0


def test_poisson_1s_oracle_symbolic():
    sympy = pytest.importorskip("sympy")
    r, s = sympy.symbols("r s", positive=True)
    q = 4 * s**2 * sympy.exp(-2 * s)
    inner = sympy.integrate(q, (s, 0, r)) / r
    outer = sympy.integrate(q / s, (s, r, sympy.oo))
    v = sympy.simplify(inner + outer)
    expected = 1 / r - sympy.exp(-2 * r) * (1 / r + 1)
    assert sympy.simplify(v - expected) == 0


def test_slater_integral_values(grid_fine):
    u = u_1s(grid_fine)
    assert abs(slater_integral(grid_fine, 0, u, u) - 5.0 / 8.0) < 1e-6
    assert slater_integral(grid_fine, 0, u, np.zeros_like(u)) == 0.0


def test_slater_disjoint_supports_newton_bracket(grid_fine):
    r = grid_fine.nodes
    a = (r > 0.1) & (r < 0.2)
    b = (r > 2.0) & (r < 4.0)
    ua = normalized(grid_fine, np.where(a, r, 0.0))
    ub = normalized(grid_fine, np.where(b, r, 0.0))
    # direct-type integral of the two disjoint unit densities
    from muelleratom.coulomb import coulomb_bilinear

    val = coulomb_bilinear(grid_fine, ua * ua, ub * ub, 0)
    assert 1.0 / 4.0 <= val <= 1.0 / 2.0  # bracketed by 1/r_far, 1/r_near


def test_angular_coefficients_selection_rules():
    for l1 in range(4):
        for l2 in range(4):
            for k in range(9):
                a = angular_coefficient(l1, l2, k)
                assert a == angular_coefficient(l2, l1, k)
                if k < abs(l1 - l2) or k > l1 + l2 or (l1 + l2 + k) % 2:
                    assert a == 0.0
                else:
                    assert a >= 0.0
    assert abs(angular_coefficient(0, 0, 0) - 1.0) < 1e-14
    assert abs(angular_coefficient(1, 1, 0) - 3.0) < 1e-14
    assert abs(angular_coefficient(1, 1, 2) - 1.2) < 1e-14
    # j j 0 case: a = (2j+1)
    for j in range(5):
        assert abs(angular_coefficient(j, j, 0) - (2 * j + 1)) < 5e-13


def test_legendre_triple_oracle():
    # quadrature oracle for the polynomial product integrals
    x, w = np.polynomial.legendre.leggauss(20)
    from numpy.polynomial.legendre import Legendre

    for l1, l2, k in [(1, 1, 2), (2, 2, 2), (1, 2, 3), (3, 3, 4)]:
        p = (
            Legendre.basis(l1)(x)
            * Legendre.basis(l2)(x)
            * Legendre.basis(k)(x)
        )
        oracle = float(np.dot(w, p))
        assert abs(legendre_triple_product(l1, l2, k) - oracle) < 1e-14


def test_rank_one_cancellation_s_channel(grid_fine, rng):
    for _ in range(10):
        u = random_s_orbital(grid_fine, rng)
        ens = single_orbital(grid_fine, u)
        eb = mueller_energy(ens, 1.0)
        assert abs(eb.direct - eb.exchange) <= 1e-10 * eb.direct


def test_fractional_self_energy_closed_form(grid_fine):
    u = u_1s(grid_fine)
    full = single_orbital(grid_fine, u, n=1.0)
    k_pair = 2 * hartree_energy(density_of(full))
    for n in (0.5, 0.25, 0.8):
        ens = single_orbital(grid_fine, u, n=n)
        eb = mueller_energy(ens, 1.0)
        closed = 0.5 * (n**2 - n) * k_pair
        assert eb.direct - eb.exchange < 0
        assert abs((eb.direct - eb.exchange) - closed) <= 1e-8 * abs(closed)


def test_exchange_ratio_half_occupation(grid_fine):
    u = u_1s(grid_fine)
    ens = single_orbital(grid_fine, u, n=0.5)
    eb = mueller_energy(ens, 1.0)
    assert abs(eb.exchange / eb.direct - 2.0) < 1e-9


def test_exchange_sum_rule_mixed_channels(grid_coarse, rng):
    from muelleratom.localize import random_radial_ensemble

    ens = random_radial_ensemble(grid_coarse, rng, ells=(0, 1, 2, 3), per_channel=2)
    table = build_exchange_table(ens, weight="constant")
    x_const = exchange_energy(ens, table)
    assert abs(x_const - 0.5 * ens.trace) < 1e-8


def test_mueller_energy_hydrogen(grid_fine):
    op = kinetic_matrix(grid_fine, 0)
    _, orbs = lowest_eigenpairs(op, -1.0 / grid_fine.nodes, 1)
    ens = single_orbital(grid_fine, orbs[0])
    eb = mueller_energy(ens, 1.0)
    assert abs(eb.total + 0.25) < 2e-3
    assert abs(eb.kinetic - 0.25) < 2e-3
    assert abs(eb.external + 0.5) < 2e-3
    assert abs(eb.direct - eb.exchange) < 1e-12


def test_energy_breakdown_consistency(grid_fine):
    ens = single_orbital(grid_fine, u_1s(grid_fine), n=0.7)
    eb = mueller_energy(ens, 1.0)
    assert (
        abs(eb.total - (eb.kinetic + eb.external + eb.direct - eb.exchange)) < 1e-12
    )
    assert eb.direct >= 0 and eb.exchange >= 0


def test_rhf_vs_mueller_relation(grid_fine):
    ens = single_orbital(grid_fine, u_1s(grid_fine), n=0.9)
    pot = Potential(grid=grid_fine, values=1.0 / grid_fine.nodes)
    rhf = rhf_energy(ens, pot)
    mue = mueller_energy(ens, 1.0)
    assert rhf.exchange == 0.0
    assert abs(rhf.total - (mue.total + mue.exchange)) < 1e-12
    zero_pot = Potential(grid=grid_fine, values=np.zeros(grid_fine.n_points))
    assert rhf_energy(ens, zero_pot).total >= 0.0


def test_trace_sum_rule(grid_coarse, rng):
    from muelleratom.localize import random_radial_ensemble

    for _ in range(5):
        ens = random_radial_ensemble(grid_coarse, rng, ells=(0, 1), per_channel=2)
        assert abs(density_of(ens).total_charge - ens.trace) < 1e-10 * max(
            1.0, ens.trace
        )


def test_occupation_segment_convexity(grid_fine, rng):
    # energies along occupation segments at fixed orbitals are convex
    u1 = random_s_orbital(grid_fine, rng)
    u2 = random_s_orbital(grid_fine, rng)
    u2 = normalized(grid_fine, u2 - integrate(grid_fine, u1 * u2) * u1)
    n_a = np.array([0.9, 0.1])
    n_b = np.array([0.3, 0.7])
    ts = np.linspace(0.0, 1.0, 9)
    vals = []
    for t in ts:
        occ = (1 - t) * n_a + t * n_b
        ens = NaturalOrbitalEnsemble(
            grid=grid_fine,
            channels=[Channel(ell=0, occupations=occ, orbitals=np.vstack([u1, u2]))],
        )
        vals.append(mueller_energy(ens, 1.0).total)
    second = np.diff(vals, 2)
    assert np.all(second >= -1e-8)


def test_validate_rejects_bad_ensembles(grid_fine):
    u = u_1s(grid_fine)
    ens = single_orbital(grid_fine, u, n=1.5)
    with pytest.raises(Exception):
        ens.validate()
    good = single_orbital(grid_fine, u, n=0.5)
    assert good.validate(trace=0.5)


def test_truncation_warning(grid_coarse, rng):
    from muelleratom.localize import random_radial_ensemble

    ens = random_radial_ensemble(grid_coarse, rng, ells=(2, 3), per_channel=1)
    table = build_exchange_table(ens, k_max=0)
    with pytest.warns(UserWarning):
        exchange_energy(ens, table)

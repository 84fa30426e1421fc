"""Spherically symmetric one-body density matrices as natural-orbital
ensembles, and the energies built from them.

An ensemble stores, per angular channel l, radial orbitals u_i(r) (normalized
as \\int u_i^2 dr = 1) with occupations n_i in [0, 1]; each orbital carries the
full (2l+1)-fold magnetic degeneracy, so the trace is sum_l (2l+1) sum_i n_i.
The square root of the ensemble is the same orbital set with occupations
sqrt(n_i).

The exchange energy of a kernel A(x, y) against the Coulomb weight expands
over multipoles into Slater-type radial integrals with angular coefficients

    a(l, l', k) = (2l+1)(2l'+1)/2 * \\int_{-1}^{1} P_l P_l' P_k dt,

computed here from exact Legendre series products rather than tabulated
3j-symbol formulas, and cross-validated by the constant-weight sum rule
(replacing the Coulomb weight by 1 must give Tr(gamma)/2).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from numpy.polynomial import legendre as npleg

from .coulomb import (
    FOUR_PI,
    Potential,
    RadialDensity,
    coulomb_bilinear,
    radial_poisson,
)
from .errors import InvalidRangeError, LengthMismatchError
from .grid import RadialGrid, integrate, kinetic_matrix


@dataclass
class Channel:
    ell: int
    occupations: np.ndarray  # (m,)
    orbitals: np.ndarray  # (m, n_points), radial u values

    @property
    def degeneracy(self) -> int:
        return 2 * self.ell + 1


@dataclass
class NaturalOrbitalEnsemble:
    grid: RadialGrid
    channels: list[Channel]

    @property
    def trace(self) -> float:
        return float(
            sum(ch.degeneracy * np.sum(ch.occupations) for ch in self.channels)
        )

    def orbital_count(self) -> int:
        return int(sum(len(ch.occupations) for ch in self.channels))

    def flat(self):
        """Orbitals flattened to parallel arrays (ells, degeneracies, occs, U)."""
        ells, degs, occs, rows = [], [], [], []
        for ch in self.channels:
            for i in range(len(ch.occupations)):
                ells.append(ch.ell)
                degs.append(ch.degeneracy)
                occs.append(ch.occupations[i])
                rows.append(ch.orbitals[i])
        n = self.grid.n_points
        U = np.array(rows) if rows else np.zeros((0, n))
        return (
            np.array(ells, dtype=int),
            np.array(degs, dtype=float),
            np.array(occs, dtype=float),
            U,
        )

    def validate(self, trace=None, tol=1e-10):
        """Check occupation bounds, per-channel orthonormality and the trace."""
        for ch in self.channels:
            if np.any(ch.occupations < -tol) or np.any(ch.occupations > 1 + tol):
                raise InvalidRangeError(
                    f"occupations outside [0,1] in channel l={ch.ell}"
                )
            m = len(ch.occupations)
            if m and ch.orbitals.shape != (m, self.grid.n_points):
                raise LengthMismatchError("orbital array shape mismatch")
            gram = (ch.orbitals * self.grid.weights) @ ch.orbitals.T
            if m and np.max(np.abs(gram - np.eye(m))) > tol:
                raise InvalidRangeError(
                    f"orbitals not orthonormal in channel l={ch.ell}"
                )
        if trace is not None and abs(self.trace - trace) > tol * max(1.0, trace):
            raise InvalidRangeError(
                f"trace {self.trace} differs from declared {trace}"
            )
        return True


@dataclass(frozen=True)
class EnergyBreakdown:
    kinetic: float
    external: float
    direct: float
    exchange: float

    @property
    def total(self) -> float:
        return self.kinetic + self.external + self.direct - self.exchange


def density_of(gamma: NaturalOrbitalEnsemble) -> RadialDensity:
    """rho(r) = (1/4 pi r^2) sum_l (2l+1) sum_i n_i u_i(r)^2."""
    grid = gamma.grid
    q = np.zeros(grid.n_points)
    for ch in gamma.channels:
        if len(ch.occupations):
            q += ch.degeneracy * (ch.occupations[:, None] * ch.orbitals**2).sum(axis=0)
    return RadialDensity(grid=grid, values=q / (FOUR_PI * grid.nodes**2))


def hartree_energy(rho: RadialDensity) -> float:
    """D(rho) = (1/2) \\iint rho(x) rho(y)/|x-y|, via Newton's theorem."""
    pot = radial_poisson(rho)
    return 0.5 * float(integrate(rho.grid, rho.charge_profile * pot.values))


def slater_integral(grid: RadialGrid, k: int, u_a: np.ndarray, u_b: np.ndarray) -> float:
    """R^k = \\iint p(r) (r_<^k/r_>^{k+1}) p(s) dr ds with p = u_a * u_b."""
    p = np.asarray(u_a, float) * np.asarray(u_b, float)
    return coulomb_bilinear(grid, p, None, k)


# ---------------------------------------------------------------------------
# angular coefficients


def legendre_triple_product(l1: int, l2: int, k: int) -> float:
    """\\int_{-1}^{1} P_{l1} P_{l2} P_k dt, exact via Legendre series algebra."""
    e1 = np.zeros(l1 + 1)
    e1[l1] = 1.0
    e2 = np.zeros(l2 + 1)
    e2[l2] = 1.0
    prod = npleg.legmul(e1, e2)
    if k >= len(prod):
        return 0.0
    # orthogonality: int P_j P_k = 2/(2k+1) delta_jk
    return float(prod[k] * 2.0 / (2 * k + 1))


@lru_cache(maxsize=None)
def angular_coefficient(l1: int, l2: int, k: int) -> float:
    """a(l1, l2, k); zero unless |l1-l2| <= k <= l1+l2 with l1+l2+k even."""
    if k < abs(l1 - l2) or k > l1 + l2 or (l1 + l2 + k) % 2:
        return 0.0
    val = 0.5 * (2 * l1 + 1) * (2 * l2 + 1) * legendre_triple_product(l1, l2, k)
    return max(val, 0.0)  # clamp roundoff; the exact value is a squared integral


# ---------------------------------------------------------------------------
# exchange table


@dataclass
class ExchangeTable:
    """Angular coefficients and Slater radial integrals for one orbital set.

    ``coupling[i, j] = sum_k a(l_i, l_j, k) R^k(u_i, u_j)`` carries the full
    degeneracy weighting, so X(gamma^{1/2}) = (1/2) sum_ij sqrt(n_i n_j)
    coupling[i, j].
    """

    ells: np.ndarray
    k_max: int
    angular: dict = field(repr=False)
    radial: dict = field(repr=False)
    coupling: np.ndarray = field(repr=False)
    weight: str = "coulomb"
    tail_estimate: float = 0.0


def build_exchange_table(
    gamma: NaturalOrbitalEnsemble, k_max: int | None = None, weight: str = "coulomb"
) -> ExchangeTable:
    ells, degs, occs, U = gamma.flat()
    grid = gamma.grid
    m = len(ells)
    full_k = int(2 * max(ells)) if m else 0
    if k_max is None:
        k_max = full_k
    angular = {}
    radial = {}
    coupling = np.zeros((m, m))
    tail = np.zeros((m, m))
    pairs_by_k: dict[int, list] = {}
    for i in range(m):
        for j in range(i, m):
            li, lj = int(ells[i]), int(ells[j])
            for k in range(abs(li - lj), li + lj + 1):
                a = angular_coefficient(li, lj, k)
                angular[(li, lj, k)] = a
                angular[(lj, li, k)] = a
                if a and k <= k_max:
                    pairs_by_k.setdefault(k, []).append((i, j, a))
    from .coulomb import multipole_profile_batch

    last_rk = np.zeros((m, m))
    for k, pairs in sorted(pairs_by_k.items()):
        if weight == "coulomb":
            P = np.array([U[i] * U[j] for i, j, _ in pairs])
            prof = multipole_profile_batch(grid, P, k)
            vals = np.einsum("ij,ij->i", P * grid.weights, prof)
        else:  # constant weight: only the monopole survives
            vals = [
                float(np.dot(grid.weights, U[i] * U[j])) ** 2 if k == 0 else 0.0
                for i, j, _ in pairs
            ]
        for (i, j, a), v in zip(pairs, vals):
            radial[(i, j, k)] = float(v)
            coupling[i, j] += a * v
            last_rk[i, j] = v
            if i != j:
                coupling[j, i] += a * v
    # dropped multipoles are bounded by the last included radial integral
    # times the dropped angular weight
    tail_total = 0.0
    for i in range(m):
        for j in range(i, m):
            li, lj = int(ells[i]), int(ells[j])
            if li + lj > k_max:
                dropped = sum(
                    angular_coefficient(li, lj, k)
                    for k in range(k_max + 1, li + lj + 1)
                )
                tail_total += abs(dropped * last_rk[i, j]) * (2.0 if i != j else 1.0)
    return ExchangeTable(
        ells=ells,
        k_max=int(k_max),
        angular=angular,
        radial=radial,
        coupling=coupling,
        weight=weight,
        tail_estimate=tail_total,
    )


def exchange_energy(gamma: NaturalOrbitalEnsemble, table: ExchangeTable) -> float:
    """X(gamma^{1/2}) under the multipole expansion of the Coulomb weight."""
    _, _, occs, _ = gamma.flat()
    if len(occs) != table.coupling.shape[0]:
        raise LengthMismatchError("exchange table does not match the ensemble")
    msqrt = np.sqrt(np.clip(occs, 0.0, None))
    x = 0.5 * float(msqrt @ table.coupling @ msqrt)
    if table.tail_estimate > 1e-6 * max(abs(x), 1e-300):
        warnings.warn(
            f"multipole truncation at k_max={table.k_max} may exceed 1e-6 "
            f"relative (tail estimate {table.tail_estimate:.3e})",
            stacklevel=2,
        )
    return x


# ---------------------------------------------------------------------------
# energies


def _kinetic_external(gamma: NaturalOrbitalEnsemble, v_ext: np.ndarray):
    grid = gamma.grid
    kinetic = 0.0
    external = 0.0
    for ch in gamma.channels:
        if not len(ch.occupations):
            continue
        op = kinetic_matrix(grid, ch.ell)
        for n_i, u in zip(ch.occupations, ch.orbitals):
            w = ch.degeneracy * n_i
            kinetic += w * op.kinetic_energy(u)
            external += w * float(integrate(grid, v_ext * u * u))
    return kinetic, external


def mueller_energy(
    gamma: NaturalOrbitalEnsemble,
    Z: float,
    table: ExchangeTable | None = None,
) -> EnergyBreakdown:
    """Kinetic - nuclear attraction + direct - square-root exchange."""
    if Z <= 0:
        raise InvalidRangeError(f"Z must be positive, got {Z}")
    grid = gamma.grid
    kinetic, external = _kinetic_external(gamma, -Z / grid.nodes)
    rho = density_of(gamma)
    direct = hartree_energy(rho)
    if table is None:
        table = build_exchange_table(gamma)
    exchange = exchange_energy(gamma, table)
    return EnergyBreakdown(
        kinetic=kinetic, external=external, direct=direct, exchange=exchange
    )


def rhf_energy(gamma: NaturalOrbitalEnsemble, potential: Potential) -> EnergyBreakdown:
    """Reduced Hartree-Fock energy: no exchange, external potential as given."""
    kinetic, external = _kinetic_external(gamma, -potential.values)
    rho = density_of(gamma)
    direct = hartree_energy(rho)
    return EnergyBreakdown(
        kinetic=kinetic, external=external, direct=direct, exchange=0.0
    )

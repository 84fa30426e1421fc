"""Minimization of the Mueller and reduced Hartree-Fock energies over
natural-orbital ensembles.

The search alternates two monotone moves:

* orbital step: per channel, rediagonalize T_l - Z/r + (rho * |x|^{-1}) and
  line-search a convex mix with the previous orbitals, accepting only if the
  full energy (exchange included) decreases;
* occupation step: minimize the exact energy model
  E(n) = sum h~_i n_i + 1/2 n.J~.n - 1/2 m.K~.m  (m = sqrt(n))
  over the box-simplex {0 <= n <= 1, sum_i (2l_i+1) n_i = N}, by projected
  gradient in the m variable where the objective is smooth.

The model tables reproduce the grid energy functional exactly (same kernels),
so acceptance decisions and the iterate log are monotone in the true energy.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .coulomb import (
    FOUR_PI,
    Potential,
    RadialDensity,
    multipole_profile_batch,
    radial_poisson,
)
from .dmatrix import (
    Channel,
    EnergyBreakdown,
    NaturalOrbitalEnsemble,
    angular_coefficient,
    build_exchange_table,
    density_of,
    mueller_energy,
    rhf_energy,
)
from .errors import InfeasibleError, InvalidRangeError
from .grid import (
    RadialGrid,
    eigs_tridiag,
    integrate,
    kinetic_matrix,
    spectral_floor,
)
from . import _kernels
from . import tf as tf_mod


@dataclass
class SolverConfig:
    ell_max: int | None = None  # default: 3 for Z <= 20, else 5
    k_max: int | None = None  # default: 2 * ell_max (exact for the channel set)
    orbitals_per_channel: int = 8
    max_outer_iter: int = 60
    energy_tol: float = 1e-7
    occ_max_iter: int = 600
    occ_tol: float = 1e-12
    damping: float = 0.5
    # Fraction of N allowed beyond r_max/2 before a run is flagged unbound.
    # Mueller occupations have fat Rydberg tails, so even well-bound neutral
    # atoms carry a few percent of N out there; 0.1 separates that from
    # wall-pressed excess charge.
    box_leak_threshold: float = 0.1
    mu_tol: float = 1e-4
    grow_subspace: bool = True  # False pins the orbital count (restricted runs)
    max_orbitals_per_channel: int = 16
    threads: int = 1
    seed: int = 0

    def resolved_ell_max(self, Z: float) -> int:
        if self.ell_max is not None:
            return self.ell_max
        return 3 if Z <= 20 else 5

    def resolved_k_max(self, Z: float) -> int:
        if self.k_max is not None:
            return self.k_max
        return 2 * self.resolved_ell_max(Z)

    def validate(self):
        if self.energy_tol <= 0 or self.occ_tol <= 0 or self.mu_tol <= 0:
            raise InvalidRangeError("tolerances must be positive")
        if self.ell_max is not None and self.ell_max < 0:
            raise InvalidRangeError("ell_max must be >= 0")
        return self


@dataclass
class MinimizationResult:
    ensemble: NaturalOrbitalEnsemble
    energy: EnergyBreakdown
    mu: float
    converged: bool
    bound: bool
    leak: float
    history: list = field(default_factory=list)
    model: str = "mueller"
    Z: float = 0.0
    N: float = 0.0
    outer_iterations: int = 0


# ---------------------------------------------------------------------------
# occupation subproblem


def _aufbau_fill(h: np.ndarray, d: np.ndarray, N: float) -> np.ndarray:
    """Exact minimizer of sum_i d_i h_i n_i over the box-simplex; degenerate
    levels (ties in h) are filled equally."""
    if N > np.sum(d) + 1e-9:
        raise InfeasibleError(f"trace {N} exceeds capacity {np.sum(d)}")
    order = np.argsort(h, kind="stable")
    n = np.zeros_like(h)
    remaining = float(N)
    i = 0
    m = len(h)
    while i < m and remaining > 1e-15:
        # group ties
        j = i
        while j + 1 < m and abs(h[order[j + 1]] - h[order[i]]) <= 1e-12 * max(
            1.0, abs(h[order[i]])
        ):
            j += 1
        group = order[i : j + 1]
        cap = float(np.sum(d[group]))
        if cap <= remaining:
            n[group] = 1.0
            remaining -= cap
        else:
            n[group] = remaining / cap
            remaining = 0.0
        i = j + 1
    return n


def _project_sqrt_box(y: np.ndarray, d: np.ndarray, N: float) -> np.ndarray:
    """Project y onto {0 <= m <= 1, sum d m^2 = N} (Euclidean)."""
    y = np.maximum(y, 0.0)
    cap = float(np.sum(d))
    if N > cap + 1e-9:
        raise InfeasibleError(f"trace {N} exceeds capacity {cap}")
    positive = y > 0
    if float(np.sum(d[positive])) < N:
        # not enough live coordinates: lift the dead ones uniformly
        dead = ~positive
        deficit = N - float(np.sum(d[positive]))
        y = y.copy()
        y[dead] = np.sqrt(deficit / max(float(np.sum(d[dead])), 1e-300))
    return _kernels.project_sqrt_box(
        np.ascontiguousarray(y), np.ascontiguousarray(d), float(N)
    )


def _project_box_simplex(y: np.ndarray, d: np.ndarray, N: float) -> np.ndarray:
    """Project y onto {0 <= n <= 1, sum d n = N} (Euclidean, weighted plane)."""
    cap = float(np.sum(d))
    if N > cap + 1e-9:
        raise InfeasibleError(f"trace {N} exceeds capacity {cap}")

    def mass(lam):
        return float(np.sum(d * np.clip(y - lam * d, 0.0, 1.0)))

    lam_lo, lam_hi = -1.0, 1.0
    while mass(lam_lo) < N:
        lam_lo *= 2.0
        if lam_lo < -1e18:
            break
    while mass(lam_hi) > N:
        lam_hi *= 2.0
        if lam_hi > 1e18:
            break
    for _ in range(200):
        lam = 0.5 * (lam_lo + lam_hi)
        if mass(lam) > N:
            lam_lo = lam
        else:
            lam_hi = lam
    n = np.clip(y - 0.5 * (lam_lo + lam_hi) * d, 0.0, 1.0)
    free = (n > 0.0) & (n < 1.0)
    denom = float(np.sum(d[free] ** 2))
    if denom > 0:
        n[free] -= (float(np.sum(d * n)) - N) * d[free] / denom
        np.clip(n, 0.0, 1.0, out=n)
    return n


def occupation_step(
    h: np.ndarray,
    J: np.ndarray,
    K: np.ndarray | None,
    degeneracy: np.ndarray,
    N: float,
    n0: np.ndarray,
    max_iter: int = 600,
    tol: float = 1e-12,
):
    """Minimize the occupation model at fixed orbitals.

    ``h``, ``J`` and ``K`` carry the degeneracy weights already (h_i includes
    the factor 2l_i+1, J and K the product of both).  ``K=None`` disables the
    square-root exchange term, turning the problem into a box-simplex QP.
    Returns (occupations, multiplier estimate, objective).
    """
    d = np.asarray(degeneracy, float)
    h = np.asarray(h, float)
    if N > float(np.sum(d)) + 1e-9:
        raise InfeasibleError(f"trace {N} exceeds capacity {np.sum(d)}")

    linear_only = (J is None or not np.any(J)) and (K is None or not np.any(K))
    if linear_only:
        n = _aufbau_fill(h / d, d, N)
        grad = h / d
        mu = _right_derivative(grad, d, n)
        return n, mu, float(np.dot(h, n))

    if K is None:
        def fval(n):
            return float(np.dot(h, n) + 0.5 * n @ J @ n)

        n = np.clip(np.asarray(n0, float), 0.0, 1.0)
        n = _project_box_simplex(n, d, N)
        f = fval(n)
        step = 1.0 / max(float(np.max(np.abs(J))) * len(n) + np.max(np.abs(h)), 1e-12)
        for _ in range(max_iter):
            grad = h + J @ n
            cand = _project_box_simplex(n - step * grad, d, N)
            fc = fval(cand)
            bt = 0
            while fc > f + 1e-15 * max(1.0, abs(f)) and bt < 50:
                step *= 0.5
                cand = _project_box_simplex(n - step * grad, d, N)
                fc = fval(cand)
                bt += 1
            moved = float(np.max(np.abs(cand - n)))
            if fc <= f:
                n, f = cand, fc
                if bt == 0:
                    step *= 1.3
            if moved < tol:
                break
        grad = (h + J @ n) / d
        return n, _right_derivative(grad, d, n), f

    # Mueller path: substitute m = sqrt(n); the objective is smooth in m
    def fval_m(m):
        n = m * m
        return float(np.dot(h, n) + 0.5 * n @ J @ n - 0.5 * m @ K @ m)

    m = np.sqrt(np.clip(np.asarray(n0, float), 0.0, 1.0))
    m = _project_sqrt_box(m, d, N)
    f = fval_m(m)
    scale = max(
        float(np.max(np.abs(h))),
        float(np.max(np.abs(J))) * len(m),
        float(np.max(np.abs(K))),
        1e-12,
    )
    step = 0.25 / scale
    for _ in range(max_iter):
        n = m * m
        grad = 2.0 * m * (h + J @ n) - K @ m
        cand = _project_sqrt_box(m - step * grad, d, N)
        fc = fval_m(cand)
        bt = 0
        while fc > f + 1e-15 * max(1.0, abs(f)) and bt < 50:
            step *= 0.5
            cand = _project_sqrt_box(m - step * grad, d, N)
            fc = fval_m(cand)
            bt += 1
        moved = float(np.max(np.abs(cand - m)))
        if fc <= f:
            m, f = cand, fc
            if bt == 0:
                step *= 1.3
        if moved < tol:
            break
    n = m * m
    with np.errstate(divide="ignore", invalid="ignore"):
        gx = np.where(m > 1e-8, (K @ m) / np.maximum(m, 1e-300), np.inf)
    grad = (h + J @ n - 0.5 * gx) / d
    return n, _right_derivative(grad, d, n), f


def _right_derivative(grad_per_charge, d, n):
    """Marginal energy of adding charge: occupation-weighted over fractional
    orbitals when any exist, else the cheapest unfilled level."""
    interior = (n > 1e-10) & (n < 1.0 - 1e-10) & np.isfinite(grad_per_charge)
    if np.any(interior):
        w = d[interior] * n[interior]
        return float(np.sum(w * grad_per_charge[interior]) / np.sum(w))
    open_lvls = (n < 1.0 - 1e-10) & np.isfinite(grad_per_charge)
    if np.any(open_lvls):
        return float(np.min(grad_per_charge[open_lvls]))
    return float(np.max(grad_per_charge[np.isfinite(grad_per_charge)]))


# ---------------------------------------------------------------------------
# energy model tables


@dataclass
class _Tables:
    ells: np.ndarray
    d: np.ndarray
    kin: np.ndarray
    ext: np.ndarray
    h_folded: np.ndarray  # d * (kin + ext)
    J_folded: np.ndarray  # d_i d_j J_ij
    K_folded: np.ndarray | None

    def energy(self, n: np.ndarray) -> float:
        e = float(np.dot(self.h_folded, n) + 0.5 * n @ self.J_folded @ n)
        if self.K_folded is not None:
            m = np.sqrt(np.clip(n, 0.0, None))
            e -= 0.5 * float(m @ self.K_folded @ m)
        return e

    def breakdown(self, n: np.ndarray) -> EnergyBreakdown:
        m = np.sqrt(np.clip(n, 0.0, None))
        return EnergyBreakdown(
            kinetic=float(np.dot(self.d * n, self.kin)),
            external=float(np.dot(self.d * n, self.ext)),
            direct=0.5 * float(n @ self.J_folded @ n),
            exchange=(
                0.5 * float(m @ self.K_folded @ m)
                if self.K_folded is not None
                else 0.0
            ),
        )


def _build_tables(
    grid: RadialGrid,
    channel_orbitals: dict,
    v_ext: np.ndarray,
    exchange: bool,
    k_max: int,
) -> _Tables:
    ells, rows = [], []
    for ell in sorted(channel_orbitals):
        for u in channel_orbitals[ell]:
            ells.append(ell)
            rows.append(u)
    ells = np.array(ells, dtype=int)
    m = len(ells)
    d = (2 * ells + 1).astype(float)
    U = np.array(rows) if m else np.zeros((0, grid.n_points))
    kin = np.zeros(m)
    ext = np.zeros(m)
    Q = U * U
    for ell in sorted(channel_orbitals):
        sel = np.where(ells == ell)[0]
        if not len(sel):
            continue
        op = kinetic_matrix(grid, int(ell))
        Qt = U[sel] * np.sqrt(grid.delta * grid.nodes)
        out = op.diag * Qt
        out[:, :-1] += op.offdiag * Qt[:, 1:]
        out[:, 1:] += op.offdiag * Qt[:, :-1]
        kin[sel] = np.einsum("ij,ij->i", Qt, out)
    ext[:] = Q @ (grid.weights * v_ext)

    # direct couplings: m monopole profiles, then one symmetric GEMM
    prof0 = multipole_profile_batch(grid, Q, 0)
    half = (Q * grid.weights) @ prof0.T
    J = 0.5 * (half + half.T)

    K = None
    if exchange:
        K = np.zeros((m, m))
        pairs_by_k: dict[int, list] = {}
        for i in range(m):
            for j in range(i, m):
                li, lj = int(ells[i]), int(ells[j])
                for k in range(abs(li - lj), min(li + lj, k_max) + 1, 2):
                    a = angular_coefficient(li, lj, k)
                    if a:
                        pairs_by_k.setdefault(k, []).append((i, j, a))
        for k, pairs in sorted(pairs_by_k.items()):
            P = np.array([U[i] * U[j] for i, j, _ in pairs])
            prof = multipole_profile_batch(grid, P, k)
            vals = np.einsum("ij,ij->i", P * grid.weights, prof)
            for (i, j, a), v in zip(pairs, vals):
                K[i, j] += a * v
                if i != j:
                    K[j, i] += a * v
    return _Tables(
        ells=ells,
        d=d,
        kin=kin,
        ext=ext,
        h_folded=d * (kin + ext),
        J_folded=np.outer(d, d) * J,
        K_folded=K,
    )


# ---------------------------------------------------------------------------
# orbital machinery


def _orthonormalize(grid: RadialGrid, U: np.ndarray) -> np.ndarray:
    """QR against the quadrature inner product; keeps column order and sign."""
    if not len(U):
        return U
    scale = np.sqrt(grid.weights + 1e-300)
    q, r = np.linalg.qr((U * scale).T)
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    out = (q * signs).T / scale
    return out


def _channel_eigensolve(grid, ell, v_eff, m, support_index=0):
    op = kinetic_matrix(grid, ell)
    diag = op.diag + v_eff
    off = op.offdiag
    if support_index > 0:
        diag = diag[support_index:]
        off = off[support_index:]
    sigma = spectral_floor(v_eff, grid.nodes)
    m_eff = min(m, len(diag) - 2)
    vals, vecs = eigs_tridiag(diag, off, m_eff, sigma)
    scale = np.sqrt(grid.delta * grid.nodes)
    U = np.zeros((vecs.shape[1], grid.n_points))
    for j in range(vecs.shape[1]):
        u = np.zeros(grid.n_points)
        u[support_index:] = vecs[:, j] / scale[support_index:]
        norm = np.sqrt(integrate(grid, u * u))
        sign = 1.0 if u[np.argmax(np.abs(u))] >= 0 else -1.0
        U[j] = sign * u / norm
    return vals, U


def _density_from(grid, channel_orbitals, ells_flat, n_flat):
    q = np.zeros(grid.n_points)
    idx = 0
    for ell in sorted(channel_orbitals):
        for u in channel_orbitals[ell]:
            q += (2 * ell + 1) * n_flat[idx] * u * u
            idx += 1
    return RadialDensity(grid=grid, values=q / (FOUR_PI * grid.nodes**2))


def _mollified_tf_seed(grid: RadialGrid, Z: float, N: float) -> RadialDensity:
    """TF density smoothed over a short log-range window and rescaled to N.

    Used only to seed the first mean field.
    """
    try:
        sol = tf_mod.tf_solve_atomic(Z, grid, tol=1e-6, max_iter=4000)
        q = sol.rho.charge_profile.copy()
    except Exception:
        kappa = 2.0 / max(Z, 1.0)
        q = grid.nodes**2 * np.exp(-2 * grid.nodes / kappa)
    # geometric smoothing window ~ 5 nodes wide, mass renormalized
    kernel = np.array([0.06, 0.24, 0.4, 0.24, 0.06])
    q = np.convolve(q, kernel, mode="same")
    total = integrate(grid, q)
    if total > 0:
        q *= N / total
    return RadialDensity(grid=grid, values=q / (FOUR_PI * grid.nodes**2))


# ---------------------------------------------------------------------------
# the alternating loop


def _minimize(
    model: str,
    grid: RadialGrid,
    N: float,
    config: SolverConfig,
    Z: float = 0.0,
    potential: Potential | None = None,
    init: NaturalOrbitalEnsemble | None = None,
    support_cut: float | None = None,
) -> MinimizationResult:
    config.validate()
    if N <= 0:
        raise InvalidRangeError(f"N must be positive, got {N}")
    exchange = model == "mueller"
    if exchange:
        if Z <= 0:
            raise InvalidRangeError(f"Z must be positive, got {Z}")
        v_ext = -Z / grid.nodes
    else:
        v_ext = -potential.values
    ell_max = config.resolved_ell_max(Z if Z > 0 else 10.0)
    k_max = config.resolved_k_max(Z if Z > 0 else 10.0)
    support_index = grid.index_above(support_cut) if support_cut else 0

    sizes = {ell: config.orbitals_per_channel for ell in range(ell_max + 1)}
    capacity = sum((2 * e + 1) * sizes[e] for e in sizes)
    while capacity < N:
        for e in sizes:
            sizes[e] += 4
        capacity = sum((2 * e + 1) * sizes[e] for e in sizes)

    orbitals: dict[int, np.ndarray] = {}
    if init is not None and init.grid.key == grid.key:
        for ch in init.channels:
            if ch.ell <= ell_max and len(ch.occupations):
                orbitals[ch.ell] = _orthonormalize(grid, ch.orbitals.copy())
                sizes[ch.ell] = max(sizes[ch.ell], len(ch.occupations))
    for ell in range(ell_max + 1):
        have = len(orbitals.get(ell, ()))
        if have < sizes[ell]:
            _, U = _channel_eigensolve(grid, ell, v_ext, sizes[ell], support_index)
            if have:
                combined = np.vstack([orbitals[ell], U])
                orbitals[ell] = _orthonormalize(grid, combined)[: sizes[ell]]
            else:
                orbitals[ell] = U

    def flat_occupations(tables, n_or_none):
        if n_or_none is not None and len(n_or_none) == len(tables.ells):
            return n_or_none
        return _aufbau_fill(tables.kin + tables.ext, tables.d, N)

    tables = _build_tables(grid, orbitals, v_ext, exchange, k_max)
    n_init = None
    if init is not None and init.grid.key == grid.key:
        flat = []
        for ell in sorted(orbitals):
            src = {c.ell: c for c in init.channels}.get(ell)
            m_here = len(orbitals[ell])
            occ = np.zeros(m_here)
            if src is not None:
                k = min(m_here, len(src.occupations))
                occ[:k] = src.occupations[:k]
            flat.append(occ)
        n_init = np.concatenate(flat) if flat else None
        if n_init is not None:
            total = float(np.dot(tables.d, n_init))
            if total > 0:
                n_init = np.clip(n_init * (N / total), 0.0, 1.0)
    n = flat_occupations(tables, n_init)
    n, mu, _ = occupation_step(
        tables.h_folded,
        tables.J_folded,
        tables.K_folded,
        tables.d,
        N,
        n,
        config.occ_max_iter,
        config.occ_tol,
    )
    energy = tables.energy(n)
    history = [energy]

    # first mean field from the smoothed TF density rather than the bare
    # orbitals; only affects the first candidate set
    seed_rho = _mollified_tf_seed(grid, Z if Z > 0 else 1.0, N) if exchange else None

    ladder = [min(1.0, 2 * config.damping)]
    t = config.damping
    while t > 0.03:
        ladder.append(t)
        t *= 0.5

    converged = False
    small_steps = 0
    outer_done = 0
    for outer in range(config.max_outer_iter):
        outer_done = outer + 1
        if outer == 0 and seed_rho is not None:
            rho = seed_rho
        else:
            rho = _density_from(grid, orbitals, tables.ells, n)
        v_h = radial_poisson(rho).values
        v_eff = v_ext + v_h
        candidates = {}
        for ell in sorted(orbitals):
            _, U = _channel_eigensolve(grid, ell, v_eff, sizes[ell], support_index)
            candidates[ell] = U
        accepted = False
        for t in ladder:
            trial = {}
            for ell in sorted(orbitals):
                old = orbitals[ell]
                new = candidates[ell]
                k = min(len(old), len(new))
                # align candidate signs with the incumbents before mixing
                ov = (old[:k] * grid.weights) @ new[:k].T
                signs = np.sign(np.diag(ov))
                signs[signs == 0] = 1.0
                mix = (1 - t) * old[:k] + t * (new[:k] * signs[:, None])
                if len(new) > k:
                    mix = np.vstack([mix, new[k:]])
                trial[ell] = _orthonormalize(grid, mix)
            tables_t = _build_tables(grid, trial, v_ext, exchange, k_max)
            e_t = tables_t.energy(n)
            if e_t <= energy + 1e-14 * max(1.0, abs(energy)):
                orbitals = trial
                tables = tables_t
                energy = e_t
                accepted = True
                break
        n, mu, _ = occupation_step(
            tables.h_folded,
            tables.J_folded,
            tables.K_folded,
            tables.d,
            N,
            n,
            config.occ_max_iter,
            config.occ_tol,
        )
        new_energy = tables.energy(n)
        history.append(new_energy)
        delta = energy - new_energy
        energy = new_energy
        if delta < config.energy_tol and (accepted or delta >= 0):
            small_steps += 1
            if small_steps >= 2:
                converged = True
                break
        else:
            small_steps = 0
        # grow a channel subspace when its least orbital is being used
        grew = False
        if config.grow_subspace:
            idx = 0
            for ell in sorted(orbitals):
                m_here = len(orbitals[ell])
                if (
                    m_here
                    and n[idx + m_here - 1] > 1e-6
                    and sizes[ell] < config.max_orbitals_per_channel
                ):
                    sizes[ell] = min(m_here + 4, config.max_orbitals_per_channel)
                    grew = True
                idx += m_here
        if grew:
            # enlarge the affected channels; the merged set keeps the old
            # orbitals in their slots, so occupations re-embed positionally
            old_counts = {ell: len(orbitals[ell]) for ell in orbitals}
            old_occ = {}
            idx = 0
            for ell in sorted(orbitals):
                old_occ[ell] = n[idx : idx + old_counts[ell]]
                idx += old_counts[ell]
            for ell in sorted(orbitals):
                if sizes[ell] > old_counts[ell]:
                    _, U = _channel_eigensolve(
                        grid, ell, v_eff, sizes[ell], support_index
                    )
                    merged = _orthonormalize(grid, np.vstack([orbitals[ell], U]))
                    orbitals[ell] = merged[: sizes[ell]]
            tables = _build_tables(grid, orbitals, v_ext, exchange, k_max)
            parts = []
            for ell in sorted(orbitals):
                occ = np.zeros(len(orbitals[ell]))
                occ[: old_counts[ell]] = old_occ[ell]
                parts.append(occ)
            n = np.concatenate(parts)
            n, mu, _ = occupation_step(
                tables.h_folded,
                tables.J_folded,
                tables.K_folded,
                tables.d,
                N,
                n,
                config.occ_max_iter,
                config.occ_tol,
            )
            energy = tables.energy(n)
            history.append(energy)

    channels = []
    idx = 0
    for ell in sorted(orbitals):
        m_here = len(orbitals[ell])
        channels.append(
            Channel(
                ell=ell,
                occupations=n[idx : idx + m_here].copy(),
                orbitals=orbitals[ell].copy(),
            )
        )
        idx += m_here
    ensemble = NaturalOrbitalEnsemble(grid=grid, channels=channels)
    rho = density_of(ensemble)
    outer_mass = float(
        integrate(grid, rho.charge_profile * (grid.nodes > grid.r_max / 2))
    )
    bound = outer_mass < config.box_leak_threshold * N
    if exchange:
        table = build_exchange_table(ensemble, k_max)
        breakdown = mueller_energy(ensemble, Z, table)
    else:
        breakdown = rhf_energy(ensemble, potential)
    return MinimizationResult(
        ensemble=ensemble,
        energy=breakdown,
        mu=mu,
        converged=converged,
        bound=bound,
        leak=outer_mass,
        history=history,
        model=model,
        Z=Z,
        N=N,
        outer_iterations=outer_done,
    )


def minimize_mueller(
    Z: float,
    N: float,
    config: SolverConfig | None = None,
    grid: RadialGrid | None = None,
    init: NaturalOrbitalEnsemble | None = None,
) -> MinimizationResult:
    from .grid import default_grid

    config = config or SolverConfig()
    grid = grid or default_grid(Z)
    return _minimize("mueller", grid, N, config, Z=Z, init=init)


def minimize_rhf(
    potential: Potential,
    N: float,
    config: SolverConfig | None = None,
    grid: RadialGrid | None = None,
    init: NaturalOrbitalEnsemble | None = None,
    support_cut: float | None = None,
) -> MinimizationResult:
    config = config or SolverConfig()
    grid = grid or potential.grid
    return _minimize(
        "rhf",
        grid,
        N,
        config,
        potential=potential,
        init=init,
        support_cut=support_cut,
    )


def orbital_step(
    gamma: NaturalOrbitalEnsemble, Z: float, config: SolverConfig, grid: RadialGrid
) -> NaturalOrbitalEnsemble:
    """One accepted orbital update at fixed occupations (no-op on rejection)."""
    cfg = replace(config, max_outer_iter=1)
    res = _minimize("mueller", grid, max(gamma.trace, 1e-12), cfg, Z=Z, init=gamma)
    return res.ensemble


def energy_curve(
    Z: float,
    N_values,
    config: SolverConfig | None = None,
    grid: RadialGrid | None = None,
) -> list:
    """Warm-started sweep of E(N); N_values must be increasing."""
    from .grid import default_grid

    config = config or SolverConfig()
    grid = grid or default_grid(Z)
    N_values = list(N_values)
    if any(b <= a for a, b in zip(N_values, N_values[1:])):
        raise InvalidRangeError("N_values must be strictly increasing")
    results = []
    warm = None
    for N in N_values:
        res = _minimize("mueller", grid, N, config, Z=Z, init=warm)
        warm = res.ensemble
        results.append(res)
    return results


@dataclass
class IonizationScan:
    Z: float
    N_c: float
    Q: float
    N_c_mu: float
    N_c_leak: float
    sweep: list  # (N, energy, mu, bound, leak)
    conclusive: bool


def ionization_scan(
    Z: float,
    config: SolverConfig | None = None,
    grid: RadialGrid | None = None,
    coarse_step: float = 0.25,
    refine_step: float = 0.05,
) -> IonizationScan:
    """Largest bound electron number, refined to ``refine_step``.

    Two unbinding criteria are tracked: the chemical-potential sign
    (mu >= -mu_tol) and box leakage.  The chemical potential is the sharp
    signal and defines the reported N_c; the leak-based crossing is reported
    alongside, and the scan is flagged inconclusive when the two disagree by
    more than 0.25 electrons.
    """
    from .grid import default_grid

    config = config or SolverConfig()
    grid = grid or default_grid(Z)
    cap = 2 * Z + 3 * Z ** (2.0 / 3.0) + 3.0

    sweep = []
    warm = None
    crossings = {"mu": None, "leak": None}
    last_bound = {"mu": None, "leak": None}

    def run(N):
        nonlocal warm
        res = _minimize("mueller", grid, N, config, Z=Z, init=warm)
        warm = res.ensemble
        mu_bound = res.mu < -config.mu_tol
        leak_bound = res.bound
        sweep.append((N, res.energy.total, res.mu, mu_bound and leak_bound, res.leak))
        return mu_bound, leak_bound

    N = float(Z)
    while N <= cap:
        mu_ok, leak_ok = run(N)
        for key, ok in (("mu", mu_ok), ("leak", leak_ok)):
            if ok:
                if crossings[key] is None:
                    last_bound[key] = N
            elif last_bound[key] is not None and crossings[key] is None:
                crossings[key] = (last_bound[key], N)
        if all(crossings[k] is not None for k in crossings):
            break
        N = round(N + coarse_step, 10)

    estimates = {}
    for key in ("mu", "leak"):
        if crossings[key] is None:
            estimates[key] = last_bound[key] if last_bound[key] is not None else Z
            continue
        lo, hi = crossings[key]
        while hi - lo > refine_step * 1.0001:
            mid = 0.5 * (lo + hi)
            mu_ok, leak_ok = run(mid)
            ok = mu_ok if key == "mu" else leak_ok
            if ok:
                lo = mid
            else:
                hi = mid
        estimates[key] = lo
    n_mu, n_leak = estimates["mu"], estimates["leak"]
    conclusive = abs(n_mu - n_leak) <= 0.25
    sweep.sort(key=lambda row: row[0])
    return IonizationScan(
        Z=Z,
        N_c=n_mu,
        Q=n_mu - Z,
        N_c_mu=n_mu,
        N_c_leak=n_leak,
        sweep=sweep,
        conclusive=conclusive,
    )

"""Theorem-scale numerical reproductions: screened-potential comparison,
ionization excess, outer-radius law, and a-priori bound audits.

Each experiment is a pure function of its configuration; repeated runs with
the same inputs reproduce bit-identically (sequential reductions throughout).
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .coulomb import FOUR_PI, lp_norm, screened_profile
from .dmatrix import build_exchange_table, density_of, exchange_energy, hartree_energy
from .errors import InvalidRangeError
from .grid import RadialGrid, build_log_grid, cumulative_integral, default_grid, integrate
from .localize import kinetic_trace
from .solver import IonizationScan, MinimizationResult, SolverConfig, ionization_scan, minimize_mueller
from . import tf as tf_mod


def parallel_map(fn, items, threads: int = 1):
    """Order-preserving map; thread pool only when threads > 1."""
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def refine_grid(grid: RadialGrid, factor: int = 2) -> RadialGrid:
    return build_log_grid(grid.r_min, grid.r_max, factor * (grid.n_points - 1) + 1)


@dataclass
class ComparisonReport:
    Z: float
    N: float
    radii: np.ndarray
    delta_phi: np.ndarray
    mueller_on_shell: np.ndarray
    tf_on_shell: np.ndarray
    weighted_sup: dict  # eps_report -> sup of delta * r^{4-eps} over r <= 1
    sup_r4: float  # sup of delta * r^4 over r <= 1
    mid_window_rel: float  # max of delta/Phi_TF over [0.5, 1]


def screened_comparison(
    Z: float,
    N: float | None = None,
    config: SolverConfig | None = None,
    grid: RadialGrid | None = None,
    radii: np.ndarray | None = None,
    eps_report=(0.1, 0.3, 0.5),
    mueller_result: MinimizationResult | None = None,
) -> ComparisonReport:
    """On-shell screened potentials of the interacting minimizer and of the
    neutral TF atom, compared across a log-spaced radius sweep."""
    N = float(Z) if N is None else float(N)
    if not (N >= Z >= 1):
        raise InvalidRangeError("comparison wants N >= Z >= 1")
    config = config or SolverConfig()
    grid = grid or default_grid(Z)
    if mueller_result is None or mueller_result.ensemble.grid.key != grid.key:
        mueller_result = minimize_mueller(Z, N, config, grid)
    rho_m = density_of(mueller_result.ensemble)
    prof_m = screened_profile(rho_m, Z)
    tf_sol = tf_mod.tf_solve_atomic(Z, grid)
    prof_tf = screened_profile(tf_sol.rho, Z)
    if radii is None:
        radii = np.geomspace(max(grid.r_min * 10, 1e-4 / Z), grid.r_max / 3, 120)
    radii = np.asarray(radii, float)
    phi_m = prof_m.on_shell_at(radii)
    phi_tf = prof_tf.on_shell_at(radii)
    delta = np.abs(phi_m - phi_tf)
    inner = radii <= 1.0
    weighted = {
        eps: float(np.max(delta[inner] * radii[inner] ** (4 - eps)))
        for eps in eps_report
    }
    window = (radii >= 0.5) & (radii <= 1.0)
    mid_rel = float(np.max(delta[window] / np.abs(phi_tf[window])))
    return ComparisonReport(
        Z=Z,
        N=N,
        radii=radii,
        delta_phi=delta,
        mueller_on_shell=phi_m,
        tf_on_shell=phi_tf,
        weighted_sup=weighted,
        sup_r4=float(np.max(delta[inner] * radii[inner] ** 4)),
        mid_window_rel=mid_rel,
    )


@dataclass
class RadiusResult:
    Z: float
    N: float
    kappa: float
    R: float
    b_tf_ratio: float
    boundary_case: bool = False


def radius_experiment(
    Z: float,
    kappa_values,
    config: SolverConfig | None = None,
    grid: RadialGrid | None = None,
    mueller_result: MinimizationResult | None = None,
) -> list:
    """Radius R(kappa) holding kappa electrons outside, from the cumulative
    charge profile by monotone bisection (log-linear interpolation)."""
    config = config or SolverConfig()
    N = float(Z)
    grid = grid or default_grid(Z)
    if mueller_result is None or mueller_result.ensemble.grid.key != grid.key:
        mueller_result = minimize_mueller(Z, N, config, grid)
    rho = density_of(mueller_result.ensemble)
    enclosed = cumulative_integral(grid, rho.charge_profile)
    total = enclosed[-1]
    b_tf = tf_mod.CONSTANTS.b_tf
    out = []
    logr = np.log(grid.nodes)
    for kappa in kappa_values:
        kappa = float(kappa)
        if not (0 < kappa <= N):
            raise InvalidRangeError(f"kappa {kappa} outside (0, N]")
        target = total - kappa
        if target <= enclosed[0]:
            out.append(
                RadiusResult(
                    Z=Z, N=N, kappa=kappa, R=grid.r_min, b_tf_ratio=np.nan,
                    boundary_case=True,
                )
            )
            continue
        # largest radius with outer charge kappa: enclosed is nondecreasing,
        # interpolate its crossing
        R = float(np.exp(np.interp(target, enclosed, logr)))
        out.append(
            RadiusResult(
                Z=Z,
                N=N,
                kappa=kappa,
                R=R,
                b_tf_ratio=R * kappa ** (1.0 / 3.0) / b_tf,
            )
        )
    return out


def apriori_audit(result: MinimizationResult, Z: float, N: float) -> dict:
    """Scale-invariant ratios of the coercive quantities against their
    expected growth: kinetic, L^{5/3} mass and direct term against
    Z^{7/3} + N, exchange against Z^{5/3} + 1, trace against 2Z + Z^{2/3}."""
    ens = result.ensemble
    grid = ens.grid
    rho = density_of(ens)
    kinetic = kinetic_trace(ens)
    l53 = lp_norm(grid, rho.values, 5.0 / 3.0) ** (5.0 / 3.0)
    direct = hartree_energy(rho)
    table = build_exchange_table(ens)
    x = exchange_energy(ens, table)
    scale_kin = Z ** (7.0 / 3.0) + N
    return {
        "Z": Z,
        "N": N,
        "kinetic": kinetic,
        "rho_53": l53,
        "direct": direct,
        "exchange": x,
        "kinetic_ratio": kinetic / scale_kin,
        "rho53_ratio": l53 / scale_kin,
        "direct_ratio": direct / scale_kin,
        "exchange_ratio": x / (Z ** (5.0 / 3.0) + 1.0),
        "trace_ratio": ens.trace / (2 * Z + Z ** (2.0 / 3.0) + 1.0),
    }


@dataclass
class IonizationTable:
    rows: list  # (Z, N_c, Q)
    slope: float
    scans: list = field(default_factory=list)


def ionization_experiment(
    Z_values,
    config: SolverConfig | None = None,
    threads: int = 1,
) -> IonizationTable:
    """Ionization scans across Z; the excess Q = N_c - Z should show no
    increasing trend (least-squares slope consistent with a constant)."""
    config = config or SolverConfig()

    def one(Z):
        return ionization_scan(float(Z), config)

    scans = parallel_map(one, Z_values, threads)
    rows = [(s.Z, s.N_c, s.Q) for s in scans]
    zs = np.array([r[0] for r in rows])
    qs = np.array([r[2] for r in rows])
    slope = float(np.polyfit(zs, qs, 1)[0]) if len(zs) > 1 else 0.0
    return IonizationTable(rows=rows, slope=slope, scans=scans)

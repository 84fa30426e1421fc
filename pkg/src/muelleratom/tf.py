"""Thomas-Fermi theory on the radial mesh: the atomic minimizer, the exterior
constrained problem, Sommerfeld asymptotics and the model constants.

Units match the rest of the package: the kinetic operator is -Delta (no 1/2)
and spin is not counted, which fixes the gradient-free kinetic coefficient at
c_tf = (3/5)(6 pi^2)^{2/3} and the long-range potential coefficient at
a_tf = (5 c_tf)^3 / (3 pi^2); phi(r) ~ a_tf r^{-4} far outside the core.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .coulomb import (
    FOUR_PI,
    Potential,
    RadialDensity,
    ScreenedProfile,
    coulomb_norm,
    multipole_profile,
    screened_potential,
    screened_profile,
)
from .errors import InfeasibleError, InvalidRangeError, NoConvergenceError, WindowError
from .grid import RadialGrid, build_log_grid, cumulative_integral, integrate


@dataclass(frozen=True)
class TheoryConstants:
    c_tf: float
    l_sc: float
    b_tf: float
    a_tf: float
    zeta: float
    provenance: tuple

    def consistency_residuals(self) -> dict:
        """Residuals of the defining identities (all should be ~1e-16)."""
        return {
            "semiclassical_vs_tf": abs(
                2.5 * self.l_sc - (3.0 / (5.0 * self.c_tf)) ** 1.5
            ),
            "semiclassical_closed_form": abs(2.5 * self.l_sc - 1.0 / (6 * np.pi**2)),
            "radius_coefficient": abs(
                self.b_tf - 5 * self.c_tf * (4.0 / (3 * np.pi**2)) ** (1.0 / 3.0)
            ),
            "singular_solution": abs(
                12 * self.a_tf
                - FOUR_PI * (3.0 / (5 * self.c_tf)) ** 1.5 * self.a_tf**1.5
            )
            / self.a_tf,
            "sommerfeld_exponent": abs(
                self.zeta**2 + 7 * self.zeta - 6.0
            ),  # root of z^2 + 7z - 6
        }


def theory_constants() -> TheoryConstants:
    c_tf = 0.6 * (6 * np.pi**2) ** (2.0 / 3.0)
    return TheoryConstants(
        c_tf=c_tf,
        l_sc=1.0 / (15 * np.pi**2),
        b_tf=5 * c_tf * (4.0 / (3 * np.pi**2)) ** (1.0 / 3.0),
        a_tf=(5 * c_tf) ** 3 / (3 * np.pi**2),
        zeta=(np.sqrt(73.0) - 7.0) / 2.0,
        provenance=(
            ("c_tf", "(3/5)(6 pi^2)^(2/3); kinetic -Delta, spinless"),
            ("l_sc", "1/(15 pi^2); phase-space volume coefficient"),
            ("b_tf", "5 c_tf (4/(3 pi^2))^(1/3); outer-radius law R ~ b_tf kappa^(-1/3)"),
            ("a_tf", "(5 c_tf)^3/(3 pi^2); coefficient of the r^-4 singular potential"),
            ("zeta", "(sqrt(73)-7)/2; decay exponent of perturbations of r^-4"),
        ),
    )


CONSTANTS = theory_constants()
# density prefactor in the TF equation: rho = _RHO_COEF [phi - mu]_+^{3/2}
_RHO_COEF = (3.0 / (5.0 * CONSTANTS.c_tf)) ** 1.5


@dataclass
class TFSolution:
    Z: float
    mass_bound: float
    rho: RadialDensity
    phi: Potential
    mu: float
    problem_kind: str  # "atomic" | "exterior"
    energy: float
    iterations: int
    residual: float
    r_cut: float = 0.0

    def equation_residual(self, floor: float = 1e-12) -> float:
        """Max relative defect of (5c/3) rho^{2/3} = [phi - mu]_+ where rho > floor."""
        rho = self.rho.values
        mask = rho > floor
        if not np.any(mask):
            return 0.0
        lhs = (5.0 * CONSTANTS.c_tf / 3.0) * rho[mask] ** (2.0 / 3.0)
        rhs = np.maximum(self.phi.values[mask] - self.mu, 0.0)
        return float(np.max(np.abs(lhs - rhs) / np.maximum(lhs, 1e-300)))


@dataclass
class ExteriorTFProblem:
    r_cut: float
    potential: Potential  # vanishes for r < r_cut
    mass_bound: float


def default_tf_grid(Z: float, n_points: int = 2000, r_max: float = 400.0) -> RadialGrid:
    """TF work needs a large box and a deep core: the neutral atom carries
    ~ (b_tf/r)^3 electrons outside radius r (r_max = 400 keeps the truncated
    tail below 2e-4), while the kinetic and attraction integrands scale like
    r^{-1/2} near the nucleus, so r_min = 5e-7/Z keeps the lost head below
    5e-4 relative in the energy."""
    return build_log_grid(5e-7 / Z, r_max, n_points)


def tf_energy(grid: RadialGrid, rho: np.ndarray, v_ext: np.ndarray) -> float:
    """c_tf \\int rho^{5/3} - \\int v_ext rho + D(rho), radial measure."""
    vol = FOUR_PI * grid.nodes**2
    kinetic = CONSTANTS.c_tf * integrate(grid, vol * rho ** (5.0 / 3.0))
    attraction = integrate(grid, vol * v_ext * rho)
    return kinetic - attraction + coulomb_norm(grid, rho)


def _picard(
    grid: RadialGrid,
    v_ext: np.ndarray,
    mu: float,
    rho0: np.ndarray,
    mask: np.ndarray | None,
    tol: float,
    max_iter: int,
    charge_cap: float = np.inf,
):
    """Fixed point for the TF equation, iterated on the repulsion potential.

    The map is v <- (rho_v * |x|^{-1}) with rho_v = coef [v_ext - v - mu]_+^{3/2};
    the positive part lives inside the map, so the mixing variable v is
    unconstrained.  The base step is damped Picard (damping 0.5, halved when
    the residual grows); an Anderson secant history of depth 6 extrapolates
    the update, without which the plain damped iteration needs O(10^4) sweeps
    at large Z.  Convergence is the sup of the pointwise relative density
    update over nodes carrying significant charge.
    """
    vol = FOUR_PI * grid.nodes**2

    def density(v):
        rho = _RHO_COEF * np.maximum(v_ext - v - mu, 0.0) ** 1.5
        if mask is not None:
            rho = rho * mask
        return rho

    # Convergence is gated on nodes where the screened potential is still
    # resolvable in float64: far out, v_ext and the repulsion cancel to ~1e-16
    # relative and the pointwise density update is pure roundoff flicker.
    v_scale = np.abs(v_ext) + 1e-300

    def charge_update(a, b, v, res_norm):
        q = vol * np.maximum(a, b)
        resolved = (q > 1e-13 * max(float(np.max(q)), 1e-300)) & (
            v_ext - v - mu > 3e-7 * v_scale
        )
        if not np.any(resolved):
            if float(np.max(q)) == 0.0 and res_norm <= tol * float(np.max(v_scale)):
                return 0.0  # genuinely the zero solution, map stationary
            return np.inf
        return float(
            np.max(np.abs(a - b)[resolved] / np.maximum(a[resolved], b[resolved]))
        )

    # seed close to the right total charge; a grossly overcharged start makes
    # the first sweeps thrash
    if np.isfinite(charge_cap) and charge_cap > 0:
        seed_mass = float(np.dot(grid.weights, vol * rho0))
        if seed_mass > charge_cap:
            rho0 = rho0 * (charge_cap / seed_mass)
    v = multipole_profile(grid, vol * rho0, 0)
    rho_prev = density(v)
    beta = 0.5
    depth = 6
    hist_v: list[np.ndarray] = []
    hist_res: list[np.ndarray] = []
    best_res = np.inf
    best_v = v.copy()
    update = np.inf
    for it in range(1, max_iter + 1):
        rho = density(v)
        g = multipole_profile(grid, vol * rho, 0)
        res = g - v
        res_norm = float(np.max(np.abs(res)))
        update = charge_update(rho, rho_prev, v, res_norm)
        # a frozen mixing step can make the density update vanish while the
        # map residual is still large; require both to be small
        res_rel = float(np.max(np.abs(res) / (v_scale + np.abs(v) + 1e-300)))
        if it > 1 and update < tol and res_rel < 1e-6:
            return rho, it, update
        rho_prev = rho
        if not np.isfinite(res_norm) or res_norm > 1e2 * best_res + 1e-300:
            # runaway extrapolation: restart from the best iterate, damped
            hist_v.clear()
            hist_res.clear()
            beta = max(beta * 0.5, 1.0 / 64.0)
            v = best_v.copy()
            continue
        if res_norm < best_res:
            best_res = res_norm
            best_v = v.copy()
        hist_v.append(v.copy())
        hist_res.append(res)
        if len(hist_v) > depth:
            hist_v.pop(0)
            hist_res.pop(0)
        if len(hist_v) >= 2:
            R = np.array(hist_res)
            dR = R[1:] - R[:-1]
            mat = dR @ dR.T
            mat[np.diag_indices_from(mat)] += 1e-14 * max(np.trace(mat), 1e-300)
            try:
                gamma = np.linalg.solve(mat, dR @ R[-1])
            except np.linalg.LinAlgError:
                gamma = np.zeros(len(hist_v) - 1)
            # keep the secant extrapolation trustworthy
            gmax = float(np.max(np.abs(gamma)))
            if gmax > 20.0:
                gamma *= 20.0 / gmax
            theta = np.zeros(len(hist_v))
            theta[-1] = 1.0
            theta[1:] -= gamma
            theta[:-1] += gamma
            mixed_v = theta @ np.array(hist_v)
            mixed_res = theta @ R
            v = np.maximum(mixed_v + beta * mixed_res, 0.0)
        else:
            v = np.maximum(v + beta * res, 0.0)
    return density(v), max_iter, update


def tf_solve_atomic(
    Z: float,
    grid: RadialGrid | None = None,
    tol: float = 1e-9,
    max_iter: int = 30000,
) -> TFSolution:
    """Unconstrained atomic minimizer; comes out neutral with mu = 0."""
    if Z <= 0:
        raise InvalidRangeError(f"Z must be positive, got {Z}")
    if grid is None:
        grid = default_tf_grid(Z)
    r = grid.nodes
    v_ext = Z / r
    # seed from a Sommerfeld-type closed form of the universal screening
    # profile: chi ~ (1 + (x/144^(1/3))^zeta)^(-3/zeta) has the right value at
    # the origin and the right r^-4 tail, and carries roughly the right mass
    b_len = (4 * np.pi) ** (-2.0 / 3.0) * (5 * CONSTANTS.c_tf / 3.0) * Z ** (-1.0 / 3.0)
    x = r / b_len
    chi = (1.0 + (x / 144.0 ** (1.0 / 3.0)) ** CONSTANTS.zeta) ** (-3.0 / CONSTANTS.zeta)
    rho0 = _RHO_COEF * (v_ext * chi) ** 1.5
    rho, iters, update = _picard(
        grid, v_ext, 0.0, rho0, None, tol, max_iter, charge_cap=Z
    )
    if update >= tol:
        raise NoConvergenceError(
            f"atomic TF fixed point stalled at update {update:.3e} "
            f"after {iters} iterations",
            residual=update,
        )
    vol = FOUR_PI * r**2
    phi = v_ext - multipole_profile(grid, vol * rho, 0)
    density = RadialDensity(grid=grid, values=rho)
    return TFSolution(
        Z=float(Z),
        mass_bound=np.inf,
        rho=density,
        phi=Potential(grid=grid, values=phi),
        mu=0.0,
        problem_kind="atomic",
        energy=tf_energy(grid, rho, v_ext),
        iterations=iters,
        residual=update,
    )


def tf_solve_exterior(
    problem: ExteriorTFProblem,
    grid: RadialGrid,
    tol: float = 1e-9,
    max_iter: int = 30000,
    mass_tol: float = 1e-8,
) -> TFSolution:
    """Constrained minimizer over densities supported outside r_cut.

    The multiplier mu >= 0 is zero when the unconstrained mass fits under the
    bound, and otherwise found by bisection on the mass-complementarity
    condition.
    """
    if problem.mass_bound < 0:
        raise InfeasibleError(f"mass bound must be >= 0, got {problem.mass_bound}")
    r = grid.nodes
    v_ext = problem.potential.values
    mask = (r >= problem.r_cut).astype(float)
    vol = FOUR_PI * r**2

    def zero_solution():
        rho = np.zeros_like(r)
        return TFSolution(
            Z=0.0,
            mass_bound=problem.mass_bound,
            rho=RadialDensity(grid=grid, values=rho),
            phi=Potential(grid=grid, values=v_ext.copy()),
            mu=0.0,
            problem_kind="exterior",
            energy=0.0,
            iterations=0,
            residual=0.0,
            r_cut=problem.r_cut,
        )

    if problem.mass_bound == 0.0 or not np.any((v_ext > 0) & (mask > 0)):
        return zero_solution()

    rho0 = _RHO_COEF * np.maximum(v_ext, 0.0) ** 1.5 * mask

    def solve(mu, seed):
        rho, iters, update = _picard(
            grid, v_ext, mu, seed, mask, tol, max_iter, charge_cap=problem.mass_bound
        )
        if update >= tol:
            raise NoConvergenceError(
                f"exterior TF fixed point stalled at update {update:.3e}", residual=update
            )
        return rho, iters

    rho, iters = solve(0.0, rho0)
    mass = integrate(grid, vol * rho)
    mu = 0.0
    total_iters = iters
    bound = problem.mass_bound
    if mass > bound * (1 + mass_tol):
        mu_lo, mu_hi = 0.0, float(np.max(v_ext))
        rho_seed = rho
        for _ in range(200):
            mu = 0.5 * (mu_lo + mu_hi)
            rho, iters = solve(mu, rho_seed)
            total_iters += iters
            mass = integrate(grid, vol * rho)
            if abs(mass - bound) <= mass_tol * max(1.0, bound):
                break
            if mass > bound:
                mu_lo = mu
            else:
                mu_hi = mu
            rho_seed = rho
    phi = v_ext - multipole_profile(grid, vol * rho, 0)
    energy = tf_energy(grid, rho, v_ext)
    return TFSolution(
        Z=0.0,
        mass_bound=bound,
        rho=RadialDensity(grid=grid, values=rho),
        phi=Potential(grid=grid, values=phi),
        mu=float(mu),
        problem_kind="exterior",
        energy=energy,
        iterations=total_iters,
        residual=0.0,
        r_cut=problem.r_cut,
    )


def exterior_problem(rho: RadialDensity, Z: float, r_cut: float) -> ExteriorTFProblem:
    """The exterior problem induced by a density: V = chi_r^+ Phi_r, mass =
    charge outside r_cut.

    The cut is snapped to the nearest grid node and the mass bound is the
    grid-quadrature mass of the masked density; with these conventions the
    masked density is an exact discrete fixed point when ``rho`` is itself a
    TF solution, so the self-comparison has mu = 0.
    """
    grid = rho.grid
    r_cut = float(grid.nodes[np.argmin(np.abs(np.log(grid.nodes) - np.log(r_cut)))])
    phi_r = screened_potential(rho, Z, r_cut).values
    mask = grid.nodes >= r_cut
    v = np.where(mask, phi_r, 0.0)
    outer_mass = integrate(grid, rho.charge_profile * mask)
    return ExteriorTFProblem(
        r_cut=r_cut,
        potential=Potential(grid=grid, values=v),
        mass_bound=max(outer_mass, 0.0),
    )


def tf_screened_profile(sol: TFSolution) -> ScreenedProfile:
    if sol.problem_kind != "atomic":
        raise InvalidRangeError("screened profile wants the atomic solution")
    return screened_profile(sol.rho, sol.Z)


def sommerfeld_check(
    sol: TFSolution,
    window: tuple,
    exterior: TFSolution | None = None,
) -> dict:
    """Universal long-range behaviour of the atomic potential.

    Reports max |phi r^4 / a_tf - 1| over the window, the fraction of
    consecutive node pairs on which that deviation decreases, and (when an
    exterior solution is supplied) the sup of
    |phi_ext - phi| / ((r_cut/x)^zeta x^-4) together with the fitted decay
    exponent of the difference.
    """
    grid = sol.rho.grid
    lo, hi = window
    if not (grid.r_min <= lo < hi <= grid.r_max):
        raise WindowError(f"window {window} outside grid ({grid.r_min}, {grid.r_max})")
    sel = (grid.nodes >= lo) & (grid.nodes <= hi)
    if np.count_nonzero(sel) < 4:
        raise WindowError("window contains fewer than 4 nodes")
    r = grid.nodes[sel]
    dev = np.abs(sol.phi.values[sel] * r**4 / CONSTANTS.a_tf - 1.0)
    decreasing = float(np.mean(np.diff(dev) < 0))
    report = {
        "max_deviation": float(np.max(dev)),
        "monotone_fraction": decreasing,
        "window": (float(lo), float(hi)),
    }
    if exterior is not None:
        rc = exterior.r_cut
        sel2 = (grid.nodes >= max(lo, 2 * rc)) & (grid.nodes <= hi)
        x = grid.nodes[sel2]
        diff = np.abs(exterior.phi.values[sel2] - sol.phi.values[sel2])
        envelope = (rc / x) ** CONSTANTS.zeta * x**-4.0
        ratio = diff / envelope
        good = diff > 0
        slope = np.nan
        if np.count_nonzero(good) >= 4:
            # diff ~ (rc/x)^p x^-4  =>  log(diff * x^4) ~ p * log(rc/x)
            slope = float(
                np.polyfit(np.log(rc / x[good]), np.log(diff[good] * x[good] ** 4), 1)[0]
            )
        report["exterior_ratio_sup"] = float(np.max(ratio))
        report["exterior_fitted_exponent"] = slope
    return report

"""Logarithmic radial mesh, quadrature and per-channel kinetic operators.

Functions of r are represented by their values at the nodes of a geometric
mesh r_k = r_min * exp(k*delta).  Quadrature weights come from exact
integration of a local polynomial interpolant (stencil of six nodes in the
interior, tapering to the trapezoid rule at the boundary intervals).  The
taper keeps every weight rule interpolatory, so constants integrate exactly
and the induced Coulomb bilinear form stays positive definite.

The kinetic operator -d^2/dr^2 + l(l+1)/r^2 with Dirichlet ends is the
standard symmetrized second-order stencil in the log variable: with
x = ln r and u = sqrt(r) w(x), the eigenproblem becomes a symmetric
tridiagonal pencil, folded here into a single symmetric matrix acting on
coefficient vectors q_k = sqrt(delta * r_k) * u_k.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded
from scipy.sparse import diags
from scipy.sparse.linalg import LinearOperator, eigsh

from . import _kernels
from .errors import InvalidRangeError, LengthMismatchError

_STENCIL = 6


def _interval_rules(r: np.ndarray):
    """Per-interval interpolatory integration coefficients.

    Interval m gets a stencil of up to six nodes around it; the stencil order
    tapers to two at the mesh ends (no extrapolation-heavy one-sided rules,
    which would make the Coulomb quadratic form indefinite).  Rows are padded
    with zeros and aligned so every window [start, start+width) is in bounds.
    """
    n = len(r)
    width = min(_STENCIL, n)
    coeffs = np.zeros((n - 1, width))
    starts = np.zeros(n - 1, dtype=np.int64)
    for m in range(n - 1):
        p = min(width, 2 * (m + 1), 2 * (n - 1 - m))
        half = p // 2 - 1
        s = min(max(m - half, 0), n - p)
        t = r[s : s + p] - r[m]
        h = r[m + 1] - r[m]
        vander = np.vander(t, p, increasing=True).T
        moments = np.array([h ** (j + 1) / (j + 1) for j in range(p)])
        c = np.linalg.solve(vander, moments)
        row_start = min(s, n - width)
        coeffs[m, s - row_start : s - row_start + p] = c
        starts[m] = row_start
    return coeffs, starts


@dataclass(frozen=True)
class RadialGrid:
    """Geometric radial mesh with interpolatory quadrature weights."""

    r_min: float
    r_max: float
    n_points: int
    nodes: np.ndarray
    weights: np.ndarray
    delta: float
    interval_coeffs: np.ndarray = field(repr=False)
    interval_starts: np.ndarray = field(repr=False)

    def __post_init__(self):
        # per-instance caches (frozen dataclass, hence setattr)
        object.__setattr__(self, "_operator_cache", {})

    @property
    def key(self):
        return (self.r_min, self.r_max, self.n_points)

    def sample(self, func) -> np.ndarray:
        return np.asarray(func(self.nodes), dtype=float)

    def index_above(self, radius: float) -> int:
        """First node index with r >= radius."""
        return int(np.searchsorted(self.nodes, radius, side="left"))


def build_log_grid(r_min: float, r_max: float, n_points: int) -> RadialGrid:
    if not (0.0 < r_min < r_max):
        raise InvalidRangeError(f"need 0 < r_min < r_max, got ({r_min}, {r_max})")
    # n = 2 is the degenerate two-endpoint mesh (geometric endpoints only);
    # anything else below 16 nodes cannot support the quadrature stencils.
    if n_points != 2 and n_points < 16:
        raise InvalidRangeError(f"n_points must be >= 16, got {n_points}")
    delta = np.log(r_max / r_min) / (n_points - 1)
    nodes = r_min * np.exp(delta * np.arange(n_points))
    nodes[-1] = r_max
    coeffs, starts = _interval_rules(nodes)
    width = coeffs.shape[1]
    weights = np.zeros(n_points)
    for m in range(n_points - 1):
        s = starts[m]
        weights[s : s + width] += coeffs[m]
    return RadialGrid(
        r_min=float(r_min),
        r_max=float(r_max),
        n_points=int(n_points),
        nodes=nodes,
        weights=weights,
        delta=float(delta),
        interval_coeffs=coeffs,
        interval_starts=starts,
    )


def default_grid(Z: float, n_points: int = 1500, r_max: float = 60.0) -> RadialGrid:
    """Default mesh for bound-state work: r_min = 1e-5/Z, r_max = 60."""
    return build_log_grid(1e-5 / Z, r_max, n_points)


def integrate(grid: RadialGrid, samples: np.ndarray) -> float:
    samples = np.asarray(samples, dtype=float)
    if samples.shape != (grid.n_points,):
        raise LengthMismatchError(
            f"expected {grid.n_points} samples, got shape {samples.shape}"
        )
    return float(np.dot(grid.weights, samples))


def cumulative_integral(grid: RadialGrid, samples: np.ndarray) -> np.ndarray:
    """F[j] = integral of the interpolant from r_min to node j."""
    samples = np.asarray(samples, dtype=float)
    if samples.shape != (grid.n_points,):
        raise LengthMismatchError(
            f"expected {grid.n_points} samples, got shape {samples.shape}"
        )
    return _kernels.cumulative_integral(
        grid.interval_coeffs, grid.interval_starts, samples
    )


@dataclass(frozen=True)
class ChannelOperator:
    """Discrete -d^2/dr^2 + l(l+1)/r^2, Dirichlet at both mesh ends.

    The matrix acts on coefficient vectors q = sqrt(delta*r) * u and is
    symmetric with non-positive off-diagonal couplings.
    """

    grid: RadialGrid
    ell: int
    diag: np.ndarray
    offdiag: np.ndarray
    boundary: str = "dirichlet"

    @property
    def matrix(self) -> np.ndarray:
        n = self.grid.n_points
        m = np.zeros((n, n))
        idx = np.arange(n)
        m[idx, idx] = self.diag
        m[idx[:-1], idx[:-1] + 1] = self.offdiag
        m[idx[:-1] + 1, idx[:-1]] = self.offdiag
        return m

    def to_q(self, u: np.ndarray) -> np.ndarray:
        return np.sqrt(self.grid.delta * self.grid.nodes) * u

    def from_q(self, q: np.ndarray) -> np.ndarray:
        return q / np.sqrt(self.grid.delta * self.grid.nodes)

    def apply_q(self, q: np.ndarray) -> np.ndarray:
        out = self.diag * q
        out[:-1] += self.offdiag * q[1:]
        out[1:] += self.offdiag * q[:-1]
        return out

    def kinetic_energy(self, u: np.ndarray) -> float:
        q = self.to_q(u)
        return float(q @ self.apply_q(q))


def kinetic_matrix(grid: RadialGrid, ell: int) -> ChannelOperator:
    if ell < 0:
        raise InvalidRangeError(f"ell must be >= 0, got {ell}")
    cache = grid._operator_cache
    if ell in cache:
        return cache[ell]
    r = grid.nodes
    d2 = grid.delta**2
    diag = (2.0 / d2 + ell * (ell + 1) + 0.25) / r**2
    offdiag = -1.0 / (d2 * r[:-1] * r[1:])
    op = ChannelOperator(grid=grid, ell=int(ell), diag=diag, offdiag=offdiag)
    cache[ell] = op
    return op


def _tridiag_solve(diag, offdiag, rhs):
    n = len(diag)
    ab = np.zeros((3, n))
    ab[0, 1:] = offdiag
    ab[1] = diag
    ab[2, :-1] = offdiag
    return solve_banded((1, 1), ab, rhs)


def eigs_tridiag(diag: np.ndarray, offdiag: np.ndarray, n_eig: int, sigma: float):
    """Lowest eigenpairs of a symmetric tridiagonal matrix by shift-invert.

    The matrix norm grows like 1/(delta*r_min)^2, so plain dense/banded
    eigensolvers lose absolute accuracy near the bottom of the spectrum;
    shift-invert with a tridiagonal factorization keeps the low eigenvalues
    accurate independently of the norm.  ``sigma`` must lie strictly below
    the spectrum; it is widened automatically if the solve fails or an
    eigenvalue shows up at or below it.
    """
    n = len(diag)
    n_eig = min(n_eig, n - 2)
    tri = diags([offdiag, diag, offdiag], [-1, 0, 1])
    v0 = np.ones(n)
    last_err = None
    for _ in range(8):
        shifted = diag - sigma

        def mv(x, _shifted=shifted):
            return _tridiag_solve(_shifted, offdiag, x)

        opinv = LinearOperator((n, n), matvec=mv, dtype=float)
        try:
            vals, vecs = eigsh(
                tri, k=n_eig, sigma=sigma, OPinv=opinv, which="LM", v0=v0, tol=1e-12
            )
        except Exception as exc:  # pragma: no cover - retry path
            last_err = exc
            sigma = 4.0 * sigma - 1.0
            continue
        order = np.argsort(vals)
        vals, vecs = vals[order], vecs[:, order]
        if vals[0] > sigma + 1e-12 * max(1.0, abs(sigma)):
            return vals, vecs
        sigma = 4.0 * sigma - 1.0
    raise RuntimeError(f"eigensolver failed to bracket the spectrum: {last_err}")


def spectral_floor(potential: np.ndarray | None, nodes: np.ndarray) -> float:
    """A provable strict lower bound for -Delta + V on the channel.

    With w = sup_r [-V(r)]_+ * r one has V >= -w/r pointwise, and the
    hydrogenic bound gives -Delta - w/r >= -w^2/4.
    """
    if potential is None:
        return -1.0
    well = float(np.max(np.maximum(-potential, 0.0) * nodes))
    return -(0.3 * well**2 + 5.0)


def lowest_eigenpairs(
    op: ChannelOperator,
    potential: np.ndarray | None,
    n_eig: int,
    sigma: float | None = None,
):
    """Lowest eigenpairs of T_l + diag(V); orbitals u normalized by quadrature."""
    grid = op.grid
    diag = op.diag.copy()
    if potential is not None:
        diag += potential
    if sigma is None:
        sigma = spectral_floor(potential, grid.nodes)
    vals, vecs = eigs_tridiag(diag, op.offdiag, n_eig, sigma)
    scale = np.sqrt(grid.delta * grid.nodes)
    orbitals = np.empty((vecs.shape[1], grid.n_points))
    for j in range(vecs.shape[1]):
        u = vecs[:, j] / scale
        norm = np.sqrt(integrate(grid, u * u))
        sign = 1.0 if u[np.argmax(np.abs(u))] >= 0 else -1.0
        orbitals[j] = sign * u / norm
    return vals, orbitals

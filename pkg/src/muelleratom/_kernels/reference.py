"""Pure-numpy implementations of the hot kernels."""

import numpy as np


def cumulative_integral(coeffs, starts, f):
    """Cumulative integral of the interpolant of ``f`` at every node.

    ``coeffs`` is an (n-1, s) array of per-interval quadrature coefficients and
    ``starts`` the first node index of each interval's stencil; unused stencil
    slots carry zero coefficients.  Returns F with F[0] = 0 and
    F[j] = integral of f from node 0 to node j.
    """
    n = len(f)
    seg = np.zeros(n - 1)
    for s in range(coeffs.shape[1]):
        seg += coeffs[:, s] * f[starts + s]
    out = np.empty(n)
    out[0] = 0.0
    np.cumsum(seg, out=out[1:])
    return out


def coulomb_profile(r, coeffs, starts, p, k):
    """On-node profile of the multipole-k convolution of a radial weight p.

    prof(r_j) = r_j^{-k-1} * int_{s<r_j} s^k p(s) ds
              + r_j^k     * int_{s>r_j} s^{-k-1} p(s) ds
    """
    rk = r**k if k else np.ones_like(r)
    rmk = r ** (-k - 1.0)
    inner = cumulative_integral(coeffs, starts, p * rk)
    outer = cumulative_integral(coeffs, starts, p * rmk)
    return rmk * inner + rk * (outer[-1] - outer)


def coulomb_profile_batch(r, coeffs, starts, P, k):
    """Row-wise :func:`coulomb_profile` for a stack P of radial weights."""
    m, n = P.shape
    rk = r**k if k else np.ones_like(r)
    rmk = r ** (-k - 1.0)
    inner = np.zeros((m, n))
    outer = np.zeros((m, n))
    seg_in = np.zeros((m, n - 1))
    seg_out = np.zeros((m, n - 1))
    for s in range(coeffs.shape[1]):
        cols = starts + s
        seg_in += coeffs[:, s] * (P[:, cols] * rk[cols])
        seg_out += coeffs[:, s] * (P[:, cols] * rmk[cols])
    np.cumsum(seg_in, axis=1, out=inner[:, 1:])
    np.cumsum(seg_out, axis=1, out=outer[:, 1:])
    return rmk * inner + rk * (outer[:, -1:] - outer)


def edge_defect_tridiag(offdiag, gamma_edge, df2):
    """Edge form of the kinetic localization defect for a tridiagonal operator.

    offdiag[k] couples nodes (k, k+1); gamma_edge[k] is the matching
    off-diagonal kernel entry; df2[k] = (1/2) sum_i (f_i(k+1) - f_i(k))^2.
    """
    return float(np.sum(-2.0 * offdiag * gamma_edge * df2))


def _sqrt_box_coords(y, d, lam):
    """Coordinate minimizers of (m - y)^2 + lam d m^2 over [0, 1].

    For 1 + lam d <= 0 the objective is concave and the minimum sits at an
    endpoint; the mass stays monotone in lam either way.
    """
    denom = 1.0 + lam * d
    convex = denom > 1e-300
    with np.errstate(divide="ignore", invalid="ignore"):
        m = np.where(convex, np.clip(y / np.where(convex, denom, 1.0), 0.0, 1.0), 0.0)
    endpoint_one = (~convex) & ((1.0 - 2.0 * y) + lam * d < 0.0)
    return np.where(endpoint_one, 1.0, m)


def project_sqrt_box(y, d, N):
    """Euclidean projection onto {0 <= m <= 1, sum d m^2 = N}."""

    def mass(lam):
        m = _sqrt_box_coords(y, d, lam)
        return float(np.sum(d * m * m))

    lam_lo = -1.0
    while mass(lam_lo) < N and lam_lo > -1e18:
        lam_lo *= 2.0
    lam_hi = 1.0
    while mass(lam_hi) > N and lam_hi < 1e18:
        lam_hi *= 2.0
    for _ in range(200):
        lam = 0.5 * (lam_lo + lam_hi)
        if mass(lam) > N:
            lam_lo = lam
        else:
            lam_hi = lam
    m = _sqrt_box_coords(y, d, lam_hi)
    free = m < 1.0
    fixed_mass = float(np.sum(d[~free]))
    free_mass = float(np.sum(d[free] * m[free] ** 2))
    if free_mass > 0:
        m = m.copy()
        m[free] = np.minimum(
            m[free] * np.sqrt(max(N - fixed_mass, 0.0) / free_mass), 1.0
        )
    return m

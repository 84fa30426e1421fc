"""Numba lane: same kernels as :mod:`reference`, fused into single passes.

Loops are sequential on purpose; results must be bit-reproducible, so no
parallel reductions.  Powers of the radius are hoisted out of the inner
loops (pow on a float exponent costs more than the rest of the stencil).
"""

import numpy as np
from numba import njit


@njit(cache=True)
def cumulative_integral(coeffs, starts, f):
    n = f.shape[0]
    width = coeffs.shape[1]
    out = np.empty(n)
    out[0] = 0.0
    acc = 0.0
    for m in range(n - 1):
        s = starts[m]
        seg = 0.0
        for j in range(width):
            seg += coeffs[m, j] * f[s + j]
        acc += seg
        out[m + 1] = acc
    return out


@njit(cache=True)
def _profile_from_powers(rk, rmk, coeffs, starts, p):
    n = p.shape[0]
    width = coeffs.shape[1]
    inner = np.empty(n)
    outer = np.empty(n)
    inner[0] = 0.0
    outer[0] = 0.0
    acc_in = 0.0
    acc_out = 0.0
    for m in range(n - 1):
        s = starts[m]
        seg_in = 0.0
        seg_out = 0.0
        for j in range(width):
            c = coeffs[m, j] * p[s + j]
            seg_in += c * rk[s + j]
            seg_out += c * rmk[s + j]
        acc_in += seg_in
        acc_out += seg_out
        inner[m + 1] = acc_in
        outer[m + 1] = acc_out
    total_out = outer[n - 1]
    prof = np.empty(n)
    for j in range(n):
        prof[j] = rmk[j] * inner[j] + rk[j] * (total_out - outer[j])
    return prof


@njit(cache=True)
def coulomb_profile(r, coeffs, starts, p, k):
    rk = r**k
    rmk = r ** (-k - 1.0)
    return _profile_from_powers(rk, rmk, coeffs, starts, p)


@njit(cache=True)
def coulomb_profile_batch(r, coeffs, starts, P, k):
    m = P.shape[0]
    n = P.shape[1]
    rk = r**k
    rmk = r ** (-k - 1.0)
    out = np.empty((m, n))
    for row in range(m):
        out[row] = _profile_from_powers(rk, rmk, coeffs, starts, P[row])
    return out


@njit(cache=True)
def edge_defect_tridiag(offdiag, gamma_edge, df2):
    total = 0.0
    for m in range(offdiag.shape[0]):
        total += -2.0 * offdiag[m] * gamma_edge[m] * df2[m]
    return total


@njit(cache=True)
def _sqrt_box_coord(y_i, d_i, lam):
    """Coordinate minimizer of (m - y)^2 + lam d m^2 over [0, 1].

    For 1 + lam d <= 0 the objective is concave and the minimum sits at an
    endpoint; the mass stays monotone in lam either way.
    """
    denom = 1.0 + lam * d_i
    if denom > 1e-300:
        m = y_i / denom
        if m < 0.0:
            return 0.0
        if m > 1.0:
            return 1.0
        return m
    # endpoint rule: m = 1 beats m = 0 iff (1-y)^2 + lam d < y^2
    return 1.0 if (1.0 - 2.0 * y_i) + lam * d_i < 0.0 else 0.0


@njit(cache=True)
def project_sqrt_box(y, d, N):
    """Euclidean projection onto {0 <= m <= 1, sum d m^2 = N}.

    Bisection on the multiplier of the quadratic constraint; the caller
    handles infeasible and all-dead edge cases.
    """
    n = y.shape[0]

    def _mass(lam):
        total = 0.0
        for i in range(n):
            m = _sqrt_box_coord(y[i], d[i], lam)
            total += d[i] * m * m
        return total

    lam_lo = -1.0
    while _mass(lam_lo) < N and lam_lo > -1e18:
        lam_lo *= 2.0
    lam_hi = 1.0
    while _mass(lam_hi) > N and lam_hi < 1e18:
        lam_hi *= 2.0
    for _ in range(200):
        lam = 0.5 * (lam_lo + lam_hi)
        if _mass(lam) > N:
            lam_lo = lam
        else:
            lam_hi = lam
    lam = lam_hi  # the feasible (mass <= N) side avoids overshoot
    out = np.empty(n)
    fixed = 0.0
    free = 0.0
    for i in range(n):
        m = _sqrt_box_coord(y[i], d[i], lam)
        out[i] = m
        if m >= 1.0:
            fixed += d[i]
        else:
            free += d[i] * m * m
    if free > 0.0:
        target = N - fixed
        if target < 0.0:
            target = 0.0
        scale = np.sqrt(target / free)
        for i in range(n):
            if out[i] < 1.0:
                out[i] = min(out[i] * scale, 1.0)
    return out

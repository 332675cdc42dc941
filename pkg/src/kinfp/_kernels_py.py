"""Pure-numpy implementations of the hot kernels.

Same call signatures as the compiled module `kinfp._kernels`; the package
picks whichever is available at import time (see `kinfp.kernels`).
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import solve_banded

BACKEND = "python"


def advect_apply(values, base, wgt, bracket, zero_mask, out, clip_mode=2):
    """Semi-Lagrangian gather along axis 0 with selectable limiting.

    values : (Nx, Nv) field
    base   : (Nx, Nv) int32, first x-index of the 4-point stencil
    wgt    : (Nx, Nv, 4) cubic Lagrange weights at the foot
    bracket: (Nx, Nv) int32, left node of the cell containing the foot
    zero_mask : (Nx, Nv) uint8, 1 where the foot left the domain (result 0)
    out    : (Nx, Nv) output, may not alias values
    clip_mode : 0 plain gather, 1 floor at zero, 2 clip to the value range
             of the bracket cell's ends (monotone)
    """
    if clip_mode not in (0, 1, 2):
        raise ValueError("clip_mode must be 0 (none), 1 (floor), or 2 (monotone)")
    acc = np.zeros_like(values)
    for k in range(4):
        acc += wgt[:, :, k] * np.take_along_axis(values, base + k, axis=0)
    if clip_mode == 2:
        fa = np.take_along_axis(values, bracket, axis=0)
        fb = np.take_along_axis(values, bracket + 1, axis=0)
        np.clip(acc, np.minimum(fa, fb), np.maximum(fa, fb), out=acc)
    elif clip_mode == 1:
        np.clip(acc, 0.0, None, out=acc)
    acc[zero_mask != 0] = 0.0
    out[...] = acc
    return out


def thomas_many(dl, dd, du, rhs):
    """Solve m independent tridiagonal systems, one per row.

    dl, dd, du, rhs : (m, n); dl[:, 0] and du[:, n-1] are ignored.
    Overwrites rhs with the solution and returns it.  Diagonal dominance is
    the caller's contract; a vanishing pivot raises.
    """
    m, n = dd.shape
    cp = np.empty_like(dd)
    piv = dd[:, 0].copy()
    if np.any(piv == 0.0):
        raise ZeroDivisionError("tridiagonal pivot vanished")
    cp[:, 0] = du[:, 0] / piv
    rhs[:, 0] = rhs[:, 0] / piv
    for j in range(1, n):
        piv = dd[:, j] - dl[:, j] * cp[:, j - 1]
        if np.any(piv == 0.0):
            raise ZeroDivisionError("tridiagonal pivot vanished")
        cp[:, j] = du[:, j] / piv
        rhs[:, j] = (rhs[:, j] - dl[:, j] * rhs[:, j - 1]) / piv
    for j in range(n - 2, -1, -1):
        rhs[:, j] -= cp[:, j] * rhs[:, j + 1]
    return rhs


def thomas_shared(dl, dd, du, rhs):
    """Solve rhs rows against one shared tridiagonal matrix.

    dl, dd, du : (n,); rhs : (m, n).  Overwrites rhs, returns it.
    """
    n = dd.size
    ab = np.zeros((3, n))
    ab[0, 1:] = du[:-1]
    ab[1, :] = dd
    ab[2, :-1] = dl[1:]
    rhs[...] = solve_banded((1, 1), ab, rhs.T, overwrite_ab=False).T
    return rhs


def particle_step(x, v, alive, z1, z2, dt, t0, exit_t, exit_v):
    """One exact-increment Langevin step with absorption at x = 0.

    x, v            : (n,) state, overwritten
    alive           : (n,) uint8, cleared on absorption
    z1, z2          : (n,) independent standard normals
    exit_t, exit_v  : (n,) exit records, written on absorption
    t0              : time at the start of the step

    The joint increment of (velocity, position - v*dt) is the exact Gaussian
    for free Langevin dynamics over dt; within-step wall crossings are
    detected on the cubic Hermite interpolant of the conditional mean path.
    Returns the number of particles absorbed during the step.
    """
    a = np.sqrt(2.0 * dt)
    b = dt**1.5 / np.sqrt(2.0)
    c = dt**1.5 / np.sqrt(6.0)
    live = alive != 0
    x0 = x[live]
    v0 = v[live]
    dv = a * z1[live]
    dx = v0 * dt + b * z1[live] + c * z2[live]
    x1 = x0 + dx
    v1 = v0 + dv

    # cubic H(u) = x0 + b1 u + b2 u^2 + b3 u^3 on u in [0, 1]
    b1 = dt * v0
    b2 = -3.0 * x0 - 2.0 * dt * v0 + 3.0 * x1 - dt * v1
    b3 = 2.0 * x0 + dt * v0 - 2.0 * x1 + dt * v1

    def H(u):
        return x0 + u * (b1 + u * (b2 + u * b3))

    # smallest u in (0, 1] where the mean path is nonpositive: endpoint or
    # an interior critical point with negative value
    u_neg = np.full(x0.shape, np.inf)
    u_neg[x1 <= 0.0] = 1.0
    disc = b2 * b2 - 3.0 * b3 * b1
    has = disc >= 0.0
    sq = np.sqrt(np.where(has, disc, 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        for sgn in (-1.0, 1.0):
            uc = np.where(
                b3 != 0.0,
                (-b2 + sgn * sq) / (3.0 * b3),
                np.where(b2 != 0.0, -b1 / (2.0 * b2), np.inf),
            )
            ok = has & (uc > 0.0) & (uc < 1.0) & (H(uc) <= 0.0)
            u_neg = np.where(ok & (uc < u_neg), uc, u_neg)

    crossed = np.isfinite(u_neg)
    if np.any(crossed):
        lo = np.zeros(np.count_nonzero(crossed))
        hi = u_neg[crossed]
        xc = x0[crossed]
        c1 = b1[crossed]
        c2 = b2[crossed]
        c3 = b3[crossed]
        for _ in range(48):
            mid = 0.5 * (lo + hi)
            neg = xc + mid * (c1 + mid * (c2 + mid * c3)) <= 0.0
            hi = np.where(neg, mid, hi)
            lo = np.where(neg, lo, mid)
        u_root = 0.5 * (lo + hi)
        vexit = (c1 + u_root * (2.0 * c2 + 3.0 * c3 * u_root)) / dt

        live_idx = np.flatnonzero(live)
        hit_idx = live_idx[crossed]
        exit_t[hit_idx] = t0 + u_root * dt
        exit_v[hit_idx] = vexit
        alive[hit_idx] = 0

    x[live] = x1
    v[live] = v1
    return int(np.count_nonzero(crossed))

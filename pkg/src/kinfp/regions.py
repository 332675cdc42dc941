"""Half-space decomposition by kinetic distance to the absorbing boundary.

For z = (t, x, v) and a boundary target set S, dist(S, z) = inf |||z'|||
over group elements z' with z o z' in S.  Writing z' = (tau, xi, omega), the
wall constraint x + xi + tau v = 0 fixes xi, leaving

    dist = min over (tau, omega) of |||(tau, -x - tau v, omega)|||

with omega restricted by the target: v + omega >= 0 for the incoming side
of the wall, v + omega <= 0 for the outgoing side, free for the whole wall.
All sets are invariant under time translation, so t never enters.

Expanding the norm's inner witness w and substituting p = v + w collapses
the minimization to one dimension,

    dist = min_p max( m(p), |p - v|, penalty(p) ),

where m(p), the best transport cost at slope p, is the positive root r of
r^3 + |p| r^2 = x, and penalty is (-p)_+ / (p)_+ / 0 for incoming /
outgoing / wall (the optimal omega projects w onto the constraint
half-line).  m is even in p and nonincreasing in |p|, so on each half-line
{p >= 0}, {p <= 0} the objective is a max of monotone and convex pieces,
hence quasiconvex there, and ternary search per branch is exact.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

_SIDES = ("in", "out", "wall")


def _gauge_root(p_abs, x):
    """Positive root r of r^3 + p r^2 = x for p, x >= 0 (vectorized).

    Starting at r = x^(1/3) puts Newton above the root of this increasing
    convex cubic, so the iteration decreases monotonically onto it.
    """
    r = np.cbrt(x)
    positive = r > 0.0
    for _ in range(60):
        f = r * r * (r + p_abs) - x
        df = r * (3.0 * r + 2.0 * p_abs)
        step = np.where(positive, f / np.where(positive, df, 1.0), 0.0)
        r = r - step
        if np.max(np.abs(step)) <= 1e-17 * max(np.max(r), 1e-300):
            break
    return r


def _objective(p, x, v, side):
    val = np.maximum(_gauge_root(np.abs(p), x), np.abs(p - v))
    if side == "in":
        val = np.maximum(val, np.maximum(-p, 0.0))
    elif side == "out":
        val = np.maximum(val, np.maximum(p, 0.0))
    return val


def _branch_min(x, v, side, lo, hi, tol):
    width = np.max(hi - lo)
    if width <= tol:
        return _objective(lo, x, v, side)
    n_iter = int(np.ceil(np.log(tol / (2.0 * width)) / np.log(2.0 / 3.0)))
    n_iter = min(max(n_iter, 40), 400)
    best = np.minimum(_objective(lo, x, v, side), _objective(hi, x, v, side))
    for _ in range(n_iter):
        third = (hi - lo) / 3.0
        m1 = lo + third
        m2 = hi - third
        f1 = _objective(m1, x, v, side)
        f2 = _objective(m2, x, v, side)
        best = np.minimum(best, np.minimum(f1, f2))
        take_left = f1 < f2
        hi = np.where(take_left, m2, hi)
        lo = np.where(take_left, lo, m1)
    return np.minimum(best, _objective(0.5 * (lo + hi), x, v, side))


def _dist_batch(x1, v1, side, tol):
    if side not in _SIDES:
        raise ValueError(f"side must be one of {_SIDES}")
    x = np.atleast_1d(np.asarray(x1, dtype=float))
    v = np.atleast_1d(np.asarray(v1, dtype=float))
    x, v = np.broadcast_arrays(x, v)
    x = x.copy()
    v = v.copy()
    if np.any(x < 0.0):
        raise ValueError("boundary distances need x1 >= 0")

    out = None
    for sign in (1.0, -1.0):
        ref = np.maximum(sign * v, 0.0) * sign  # v projected onto the branch
        cap = _objective(ref, x, v, side)
        # the branch optimum p* has |p* - v| <= H(p*) <= cap, and cap >= |ref - v|
        # keeps the clipped interval nonempty
        if sign > 0:
            lo = np.maximum(v - cap, 0.0)
            hi = np.maximum(v + cap, 0.0)
        else:
            lo = np.minimum(v - cap, 0.0)
            hi = np.minimum(v + cap, 0.0)
        val = _branch_min(x, v, side, lo, hi, tol)
        out = val if out is None else np.minimum(out, val)
    return out


def _as_input_shape(arr, x1, v1):
    if np.isscalar(x1) and np.isscalar(v1):
        return float(arr.reshape(-1)[0])
    return arr.reshape(np.broadcast_shapes(np.shape(x1), np.shape(v1)))


def dist_to_incoming(x1, v1, tol=1e-8):
    """Kinetic distance to the incoming part of the wall (x=0, velocity >= 0)."""
    return _as_input_shape(_dist_batch(x1, v1, "in", tol), x1, v1)


def dist_to_outgoing(x1, v1, tol=1e-8):
    """Kinetic distance to the outgoing part of the wall (x=0, velocity <= 0)."""
    return _as_input_shape(_dist_batch(x1, v1, "out", tol), x1, v1)


def dist_to_wall(x1, v1, tol=1e-8):
    """Kinetic distance to the whole wall x = 0 (boundary velocity free)."""
    return _as_input_shape(_dist_batch(x1, v1, "wall", tol), x1, v1)


class RegionLabel(NamedTuple):
    label: np.ndarray  # 'P', 'O', or 'N'
    sub: np.ndarray  # for N: 'I' (isolated) or 'W' (weighted); '' otherwise
    ambiguous: np.ndarray  # within tol of a deciding threshold
    dist_in: np.ndarray
    dist_out: np.ndarray
    dist_wall: np.ndarray


def classify(x1, v1, R, tol=1e-9):
    """Label points P / O / N at scale R, with the isolated/weighted split of N.

    P takes dist-to-incoming <= sqrt(R); O takes the remaining points with
    dist-to-outgoing <= sqrt(R/10); N is everything else.  Ties within tol
    go to the earlier set and are flagged ambiguous.
    """
    if R <= 0.0:
        raise ValueError("R must be positive")
    x = np.atleast_1d(np.asarray(x1, dtype=float))
    v = np.atleast_1d(np.asarray(v1, dtype=float))
    x, v = np.broadcast_arrays(x, v)
    if np.any(x <= 0.0):
        raise ValueError("classify needs x1 > 0")
    din = _dist_batch(x, v, "in", min(tol, 1e-8))
    dout = _dist_batch(x, v, "out", min(tol, 1e-8))
    dwall = np.minimum(din, dout)

    thr_p = np.sqrt(R)
    thr_o = np.sqrt(R / 10.0)
    is_p = din <= thr_p + tol
    is_o = ~is_p & (dout <= thr_o + tol)
    label = np.where(is_p, "P", np.where(is_o, "O", "N"))
    ambiguous = (np.abs(din - thr_p) <= tol) | (~is_p & (np.abs(dout - thr_o) <= tol))
    isolated = (label == "N") & (v <= 0.0) & (x <= -(v**3))
    sub = np.where(isolated, "I", np.where(label == "N", "W", ""))
    return RegionLabel(label, sub, ambiguous, din, dout, dwall)


def _smoothstep(u):
    u = np.clip(u, 0.0, 1.0)
    return u * u * u * (u * (6.0 * u - 15.0) + 10.0)


def chi(region, R, x1, v1):
    """Smooth cutoff for one region at scale R, as a fixed unit-scale profile
    composed with the kinetic dilation (distances scale exactly like sqrt(R)).

    P: 1 on P_R, 0 outside P_{3R/2}.  N: 1 on N_R, 0 outside N_{2R/3} (the
    enlargement of an exterior region shrinks R).  O: 1 on O_R, 0 once the
    outgoing distance passes the 3/2-scale threshold or the point falls in
    P_{2R/3}; the suppression transitions strictly inside P_R so the cutoff
    stays smooth across O_R's shared boundary with P_R.
    """
    if R <= 0.0:
        raise ValueError("R must be positive")
    if region == "P":
        u = dist_to_incoming(x1, v1) / np.sqrt(R)
        return 1.0 - _smoothstep((u - 1.0) / (np.sqrt(1.5) - 1.0))
    if region == "O":
        u = dist_to_outgoing(x1, v1) / np.sqrt(R / 10.0)
        far = 1.0 - _smoothstep((u - 1.0) / (np.sqrt(1.5) - 1.0))
        w = dist_to_incoming(x1, v1) / np.sqrt(R)
        gate = _smoothstep((w - np.sqrt(2.0 / 3.0)) / (1.0 - np.sqrt(2.0 / 3.0)))
        return far * gate
    if region == "N":
        u = dist_to_wall(x1, v1) / np.sqrt(R / 10.0)
        return _smoothstep((u - np.sqrt(2.0 / 3.0)) / (1.0 - np.sqrt(2.0 / 3.0)))
    raise ValueError("region must be 'P', 'O', or 'N'")

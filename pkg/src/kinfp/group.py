"""Galilean group with scaling weights (2,3,1) on (t, x, v), its invariant
quasi-norm, and the induced left-invariant distance.

Coordinates are the reduced ones: a single x component and a single v
component (the transverse directions play no role in any of the quantities
built here).  Group law, inverse, and dilations:

    (t, x, v) o (t', x', v') = (t + t', x + x' + t' v, v + v')
    (t, x, v)^-1             = (-t, -x + t v, -v)
    delta_r (t, x, v)        = (r^2 t, r^3 x, r v)

The quasi-norm minimizes max(|t|^(1/2), |x - t w|^(1/3), |v - w|, |w|) over
the auxiliary velocity w; the distance is d(z1, z2) = norm(z2^-1 o z1).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np


class PhasePoint(NamedTuple):
    t: float
    x: float
    v: float


def compose(a, b):
    """Group product a o b componentwise; accepts scalars or arrays."""
    ta, xa, va = a
    tb, xb, vb = b
    return (ta + tb, xa + xb + tb * va, va + vb)


def inverse(a):
    t, x, v = a
    return (-t, -x + t * v, -v)


def dilate(r, a):
    t, x, v = a
    return (r**2 * t, r**3 * x, r * v)


def _objective(sqrt_t, x, v, tterm_x, w):
    # max over the four norm terms at auxiliary velocity w
    return np.maximum.reduce(
        [
            sqrt_t,
            np.cbrt(np.abs(x - tterm_x * w)),
            np.abs(v - w),
            np.abs(w),
        ]
    )


def knorm_batch(t, x, v, tol: float = 1e-8, max_iter: int = 200):
    """Vectorized quasi-norm.  Ternary search over the auxiliary velocity.

    The objective is a max of quasiconvex terms and the only flat pieces sit
    at the global minimum (they come from the w-independent lower bounds), so
    ternary search localizes the minimum; the bracket [-M, M] with
    M = value at w = 0 is valid because |w| alone exceeds M outside it.
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    x = np.atleast_1d(np.asarray(x, dtype=float))
    v = np.atleast_1d(np.asarray(v, dtype=float))
    t, x, v = np.broadcast_arrays(t, x, v)
    sqrt_t = np.sqrt(np.abs(t))
    M = np.maximum.reduce([sqrt_t, np.cbrt(np.abs(x)), np.abs(v)])
    lo = -M
    hi = M.copy()
    best = M.copy()  # value at w = 0
    scale = max(1.0, float(M.max(initial=0.0)))
    # bracket shrinks by 2/3 per iteration; stop once 4 * width < tol
    n_iter = int(np.ceil(np.log(max(tol, 1e-300) / (8.0 * scale)) / np.log(2.0 / 3.0)))
    n_iter = max(n_iter, 40)
    if n_iter > max_iter:
        raise RuntimeError(
            f"norm tolerance {tol} needs {n_iter} iterations (cap {max_iter})"
        )
    for _ in range(n_iter):
        third = (hi - lo) / 3.0
        m1 = lo + third
        m2 = hi - third
        f1 = _objective(sqrt_t, x, v, t, m1)
        f2 = _objective(sqrt_t, x, v, t, m2)
        np.minimum(best, np.minimum(f1, f2), out=best)
        take = f1 < f2
        hi = np.where(take, m2, hi)
        lo = np.where(take, lo, m1)
    np.minimum(best, _objective(sqrt_t, x, v, t, 0.5 * (lo + hi)), out=best)
    return best


def knorm(z, tol: float = 1e-8) -> float:
    t, x, v = z
    return float(knorm_batch(t, x, v, tol=tol).reshape(-1)[0])


def kdist_batch(t1, x1, v1, t2, x2, v2, tol: float = 1e-8):
    d = compose(inverse((t2, x2, v2)), (t1, x1, v1))
    return knorm_batch(*d, tol=tol)


def kdist(z1, z2, tol: float = 1e-8) -> float:
    return float(knorm(compose(inverse(z2), z1), tol=tol))


@dataclass(frozen=True)
class KineticCylinder:
    """Backward cylinder: points no later than the center and within radius."""

    center: PhasePoint
    radius: float

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("radius must be positive")

    def contains(self, z, tol: float = 1e-8) -> bool:
        t = z[0]
        if t > self.center[0] + tol:
            return False
        return kdist(z, tuple(self.center), tol=tol) <= self.radius + tol

    def dilated(self, r: float) -> "KineticCylinder":
        return KineticCylinder(PhasePoint(*dilate(r, tuple(self.center))), r * self.radius)


# -- interval hulls under the group law ------------------------------------
#
# Boxes are ((t_lo, t_hi), (x_lo, x_hi), (v_lo, v_hi)).  Each coordinate of
# a o b and a o b^-1 is a sum of interval variables plus one product of two
# of them, so the per-coordinate ranges are attained at corners and the
# bounding boxes below are componentwise tight.


def _interval_product(a, b):
    c = (a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1])
    return (min(c), max(c))


def compose_box(A, B):
    """Tight bounding box of {a o b : a in A, b in B}."""
    (ta, xa, va) = A
    (tb, xb, vb) = B
    shear = _interval_product(tb, va)
    return (
        (ta[0] + tb[0], ta[1] + tb[1]),
        (xa[0] + xb[0] + shear[0], xa[1] + xb[1] + shear[1]),
        (va[0] + vb[0], va[1] + vb[1]),
    )


def compose_box_inv(A, B):
    """Tight bounding box of {a o b^-1}: a o b^-1 = (ta-tb, xa-xb+tb*(vb-va), va-vb)."""
    (ta, xa, va) = A
    (tb, xb, vb) = B
    dv = (vb[0] - va[1], vb[1] - va[0])
    shear = _interval_product(tb, dv)
    return (
        (ta[0] - tb[1], ta[1] - tb[0]),
        (xa[0] - xb[1] + shear[0], xa[1] - xb[0] + shear[1]),
        (va[0] - vb[1], va[1] - vb[0]),
    )


def box_contains(outer, inner, tol: float = 1e-12) -> bool:
    return all(
        o[0] - tol <= i[0] and i[1] <= o[1] + tol for o, i in zip(outer, inner)
    )


def dilate_box(r, B):
    (tb, xb, vb) = B
    s2, s3 = r**2, r**3
    return (
        tuple(sorted((s2 * tb[0], s2 * tb[1]))),
        tuple(sorted((s3 * xb[0], s3 * xb[1]))),
        tuple(sorted((r * vb[0], r * vb[1]))),
    )

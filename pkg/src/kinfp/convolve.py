"""Group convolution of grid fields and the matching Young inequality check.

The convolution pairs a field f with a compactly supported kernel psi:

    (f * psi)(z) = integral of f(z o u^-1) psi(u) du  over u in supp(psi)

with z o u^-1 = (t - tau, x - xi - tau*(v - omega), v - omega) for
u = (tau, xi, omega).  Quadrature runs on psi's grid; f is sampled by
multilinear interpolation, so every displaced point must stay inside f's
box.  Derivatives in v and along the free-streaming field pass onto psi,
which the tests exercise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .group import box_contains, compose_box_inv
from .gridfn import Axis, GridFunction

_TXV = ("t", "x", "v")


def _require_txv(g: GridFunction, label: str):
    if g.names != _TXV:
        raise ValueError(f"{label} must have axes (t, x, v), got {g.names}")


def max_output_box(f: GridFunction, psi: GridFunction):
    """Largest box A with hull(A o B^-1) inside f's box, B = psi's box.

    Returned as ((t_lo, t_hi), (x_lo, x_hi), (v_lo, v_hi)); raises if empty.
    The x range is computed after the v range since the shear term couples
    them.
    """
    _require_txv(f, "f")
    _require_txv(psi, "psi")
    (ft, fx, fv) = f.box()
    (tb, xb, vb) = psi.box()
    ta = (ft[0] + tb[1], ft[1] + tb[0])
    va = (fv[0] + vb[1], fv[1] + vb[0])
    if ta[0] >= ta[1] or va[0] >= va[1]:
        raise ValueError("psi support too large for f's box")
    dv = (vb[0] - va[1], vb[1] - va[0])
    sh = [tb[0] * dv[0], tb[0] * dv[1], tb[1] * dv[0], tb[1] * dv[1]]
    g_lo = -xb[1] + min(sh)
    g_hi = -xb[0] + max(sh)
    xa = (fx[0] - g_lo, fx[1] - g_hi)
    if xa[0] >= xa[1]:
        raise ValueError("psi support too large for f's box")
    return (ta, xa, va)


def _snap_axes_inside(f: GridFunction, box):
    """Node-aligned sub-axes of f's grid inside the given box."""
    axes = []
    for a, (lo, hi) in zip(f.axes, box):
        keep = a.nodes[(a.nodes >= lo - 1e-12) & (a.nodes <= hi + 1e-12)]
        if keep.size < 2:
            raise ValueError(f"output box too small along {a.name!r}")
        axes.append(Axis(a.name, keep))
    return tuple(axes)


def kconvolve(f: GridFunction, psi: GridFunction, out_axes=None) -> GridFunction:
    """Convolve f with psi, sampled on out_axes (default: the largest
    node-aligned sub-grid of f whose enlarged domain stays inside f's box)."""
    _require_txv(f, "f")
    _require_txv(psi, "psi")
    if np.any(f.values < 0) or np.any(psi.values < 0):
        raise ValueError("kconvolve expects nonnegative inputs")
    if out_axes is None:
        out_axes = _snap_axes_inside(f, max_output_box(f, psi))
    out_box = tuple((a.lo, a.hi) for a in out_axes)
    hull = compose_box_inv(out_box, psi.box())
    if not box_contains(f.box(), hull, tol=1e-9):
        raise ValueError("enlarged output domain exits f's box")

    tg, xg, vg = np.meshgrid(*(a.nodes for a in out_axes), indexing="ij")
    shape = tg.shape
    tg = tg.ravel()
    xg = xg.ravel()
    vg = vg.ravel()

    wq = psi.axes[0].trapezoid_weights()
    for a in psi.axes[1:]:
        wq = np.multiply.outer(wq, a.trapezoid_weights())
    wpsi = (wq * psi.values).ravel()
    tau, xi, om = np.meshgrid(*(a.nodes for a in psi.axes), indexing="ij")
    tau = tau.ravel()
    xi = xi.ravel()
    om = om.ravel()

    acc = np.zeros(tg.size)
    pts = np.empty((tg.size, 3))
    for k in range(tau.size):
        if wpsi[k] == 0.0:
            continue
        dvk = vg - om[k]
        pts[:, 0] = tg - tau[k]
        pts[:, 1] = xg - xi[k] - tau[k] * dvk
        pts[:, 2] = dvk
        acc += wpsi[k] * f.interp(pts)
    return GridFunction(out_axes, acc.reshape(shape))


@dataclass(frozen=True)
class YoungReport:
    p: float
    q: float
    r: float
    lhs: float
    rhs: float
    norm_f: float
    norm_psi: float
    eps_quad: float
    passed: bool


def young_check(
    f: GridFunction,
    psi: GridFunction,
    p: float,
    q: float,
    r: float,
    out_axes=None,
    eps_quad: float = 0.05,
) -> YoungReport:
    """Check ||f*psi||_r(A) <= (1+eps) ||f||_p(A o B^-1) ||psi||_q(B).

    Exponents must satisfy 1/r + 1 = 1/p + 1/q (inf allowed).  The f-norm
    runs over the node-aligned cover of the composed hull, which only
    enlarges the right side.
    """
    inv = lambda e: 0.0 if np.isinf(e) else 1.0 / e
    if min(p, q, r) < 1.0:
        raise ValueError("exponents must be >= 1")
    if abs(inv(r) + 1.0 - inv(p) - inv(q)) > 1e-9:
        raise ValueError(f"exponents ({p}, {q}, {r}) violate 1/r + 1 = 1/p + 1/q")
    conv = kconvolve(f, psi, out_axes=out_axes)
    hull = compose_box_inv(conv.box(), psi.box())
    # mask: smallest node-aligned region covering the hull
    mask = np.ones(f.values.shape, dtype=bool)
    for k, (a, (lo, hi)) in enumerate(zip(f.axes, hull)):
        i0 = max(int(np.searchsorted(a.nodes, lo, side="right") - 1), 0)
        i1 = min(int(np.searchsorted(a.nodes, hi, side="left")), a.num - 1)
        keep = np.zeros(a.num, dtype=bool)
        keep[i0 : i1 + 1] = True
        sh = [1, 1, 1]
        sh[k] = a.num
        mask &= keep.reshape(sh)
    lhs = conv.lp_norm(r)
    nf = f.lp_norm(p, mask=mask)
    npsi = psi.lp_norm(q)
    rhs = nf * npsi
    return YoungReport(
        p=p,
        q=q,
        r=r,
        lhs=lhs,
        rhs=rhs,
        norm_f=nf,
        norm_psi=npsi,
        eps_quad=eps_quad,
        passed=bool(lhs <= rhs * (1.0 + eps_quad)),
    )

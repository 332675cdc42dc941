"""Brute-force reference implementations used only by the tests.

Everything here trades speed for transparency: dense grid scans and nested
loops with no shared code with the package internals beyond numpy.
"""

from __future__ import annotations

import numpy as np


def knorm_grid(t, x, v, n=40001):
    """Dense scan over the auxiliary velocity.  Upper bound on the true
    minimum, within one grid step times the local slope."""
    M = max(abs(t) ** 0.5, abs(x) ** (1.0 / 3.0), abs(v))
    if M == 0.0:
        return 0.0
    w = np.linspace(-M, M, n)
    obj = np.maximum.reduce(
        [
            np.full_like(w, abs(t) ** 0.5),
            np.cbrt(np.abs(x - t * w)),
            np.abs(v - w),
            np.abs(w),
        ]
    )
    return float(obj.min())


def boundary_dist_grid(x, v, side, n_tau=401, n_om=401, n_w=201, levels=3):
    """Distance from (0, x, v) to the time-swept boundary set, by nested grid
    search over (tau, omega, w) with shrink-refine.

    side: "in" (target velocity constraint omega >= -v), "out" (<= -v),
    "wall" (free).  Returns the minimized quasi-norm value.
    """

    def norm_grid(tau, om):
        xi = -x - tau * v
        # inner min over w on a bracket
        M = np.maximum.reduce(
            [np.sqrt(np.abs(tau)), np.cbrt(np.abs(xi)), np.abs(om)]
        )
        M = np.maximum(M, 1e-30)
        best = None
        for k in range(n_w):
            w = (-1.0 + 2.0 * k / (n_w - 1)) * M
            obj = np.maximum.reduce(
                [
                    np.sqrt(np.abs(tau)),
                    np.cbrt(np.abs(xi - tau * w)),
                    np.abs(om - w),
                    np.abs(w),
                ]
            )
            best = obj if best is None else np.minimum(best, obj)
        return best

    # generous initial bracket from a feasible candidate
    om0 = {"in": max(0.0, -v), "out": min(0.0, -v), "wall": 0.0}[side]
    U = float(norm_grid(np.array([0.0]), np.array([om0]))[0]) * 1.05 + 1e-9
    tau_c, tau_r = 0.0, U**2
    om_c, om_r = om0, 2.0 * U
    val = np.inf
    for _ in range(levels):
        taus = np.linspace(tau_c - tau_r, tau_c + tau_r, n_tau)
        oms = np.linspace(om_c - om_r, om_c + om_r, n_om)
        if side == "in":
            oms = oms[oms >= -v]
        elif side == "out":
            oms = oms[oms <= -v]
        if oms.size == 0:
            oms = np.array([-v])
        tg, og = np.meshgrid(taus, oms, indexing="ij")
        vals = norm_grid(tg.ravel(), og.ravel())
        k = int(np.argmin(vals))
        val = min(val, float(vals[k]))
        tau_c = tg.ravel()[k]
        om_c = og.ravel()[k]
        tau_r = 4.0 * (taus[1] - taus[0]) if taus.size > 1 else tau_r * 0.1
        om_r = 4.0 * (oms[1] - oms[0]) if oms.size > 1 else om_r * 0.1
    return val


def trilinear(axes_nodes, values, pt):
    """Plain single-point trilinear interpolation."""
    idx = []
    frac = []
    for nodes, q in zip(axes_nodes, pt):
        i = int(np.searchsorted(nodes, q, side="right") - 1)
        i = min(max(i, 0), nodes.size - 2)
        idx.append(i)
        frac.append((q - nodes[i]) / (nodes[i + 1] - nodes[i]))
    out = 0.0
    for c0 in (0, 1):
        for c1 in (0, 1):
            for c2 in (0, 1):
                w = (
                    (frac[0] if c0 else 1 - frac[0])
                    * (frac[1] if c1 else 1 - frac[1])
                    * (frac[2] if c2 else 1 - frac[2])
                )
                out += w * values[idx[0] + c0, idx[1] + c1, idx[2] + c2]
    return out


def kconvolve_point(f_axes, f_values, psi_axes, psi_values, z):
    """Nested-loop convolution at a single output point."""
    t, x, v = z
    tw = _trap_w(psi_axes[0])
    xw = _trap_w(psi_axes[1])
    vw = _trap_w(psi_axes[2])
    acc = 0.0
    for i, tau in enumerate(psi_axes[0]):
        for j, xi in enumerate(psi_axes[1]):
            for k, om in enumerate(psi_axes[2]):
                w = tw[i] * xw[j] * vw[k] * psi_values[i, j, k]
                if w == 0.0:
                    continue
                pt = (t - tau, x - xi - tau * (v - om), v - om)
                acc += w * trilinear(f_axes, f_values, pt)
    return acc


def _trap_w(nodes):
    d = np.diff(nodes)
    w = np.zeros(nodes.size)
    w[:-1] += 0.5 * d
    w[1:] += 0.5 * d
    return w

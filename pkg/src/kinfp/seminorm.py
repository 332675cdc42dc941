"""Discrete kinetic H^1 seminorm on (t, x, v) grid functions.

The seminorm has two pieces: the velocity-gradient part, and a dual norm
of the transport derivative Yg = d_t g + v d_x g measured per (t, x) slice
in H^-1 of the velocity variable.  The dual part is realized by solving
-u'' = Yg on the v-section with zero Dirichlet ends and integrating u'^2;
restricting the test functions to grid-representable ones that vanish at
the section ends makes this a truncated proxy for the true dual norm.  It
underestimates the supremum over all of H^1_v, but is itself a norm and is
stable under refinement, which is what the inequality checks need.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

from .gridfn import GridFunction

SUPPORT_RTOL = 1e-10


@dataclass(frozen=True)
class H1KinResult:
    grad_part: float
    dual_part: float

    @property
    def total(self) -> float:
        return self.grad_part + self.dual_part


def _axis_spacings(nodes):
    d = np.diff(nodes)
    if np.any(d <= 0.0):
        raise ValueError("axis nodes must be strictly increasing")
    return d


def upwind_transport(values, t_nodes, x_nodes, v_nodes):
    """Yg = d_t g + v d_x g with one-sided differences.

    Time is differenced backward (information flows forward in t); the x
    difference is upwinded by the sign of v.  At faces where the upwind
    neighbor is missing the one-sided difference from the other side is
    used, which is only adequate when g is negligible there or the face is
    the physical wall x = 0.
    """
    dt = _axis_spacings(t_nodes)
    dx = _axis_spacings(x_nodes)

    gt = np.empty_like(values)
    gt[1:] = (values[1:] - values[:-1]) / dt[:, None, None]
    gt[0] = gt[1] if values.shape[0] > 1 else 0.0

    back = np.empty_like(values)
    back[:, 1:, :] = (values[:, 1:, :] - values[:, :-1, :]) / dx[None, :, None]
    fwd = np.empty_like(values)
    fwd[:, :-1, :] = back[:, 1:, :]
    # missing upwind neighbors: fall back to the one-sided value available
    back[:, 0, :] = fwd[:, 0, :]
    fwd[:, -1, :] = back[:, -1, :]

    v = np.asarray(v_nodes)
    gx = np.where(v[None, None, :] > 0.0, back, fwd)
    return gt + v[None, None, :] * gx


def _section_ranges(mask):
    """Per (t, x) row of a (nt, nx, nv) mask: inclusive v-index range.

    Rows must be contiguous runs; empty rows get (-1, -2).
    """
    nt, nx, nv = mask.shape
    flat = mask.reshape(nt * nx, nv)
    any_row = flat.any(axis=1)
    first = np.argmax(flat, axis=1)
    last = nv - 1 - np.argmax(flat[:, ::-1], axis=1)
    counts = flat.sum(axis=1)
    first = np.where(any_row, first, -1)
    last = np.where(any_row, last, -2)
    if np.any(counts[any_row] != last[any_row] - first[any_row] + 1):
        raise ValueError("mask v-sections must be contiguous")
    return first, last


def _dual_energy_rows(rhs_rows, dv, first, last):
    """Sum of u'^2 dv per row for -u'' = rhs on [first, last], u = 0 at ends."""
    m, nv = rhs_rows.shape
    energy = np.zeros(m)
    keys = first.astype(np.int64) * nv + last.astype(np.int64)
    keys[first < 0] = -1
    for key in np.unique(keys):
        if key < 0:
            continue
        j0, j1 = int(key // nv), int(key % nv)
        rows = np.nonzero(keys == key)[0]
        n_int = j1 - j0 - 1
        if n_int < 1:
            continue
        ab = np.zeros((3, n_int))
        ab[0, 1:] = -1.0 / dv**2
        ab[1, :] = 2.0 / dv**2
        ab[2, :-1] = -1.0 / dv**2
        u_int = solve_banded((1, 1), ab, rhs_rows[np.ix_(rows, range(j0 + 1, j1))].T)
        u = np.zeros((j1 - j0 + 1, len(rows)))
        u[1:-1] = u_int
        energy[rows] = np.sum(np.diff(u, axis=0) ** 2, axis=0) / dv
    return energy


def h1kin_seminorm(g: GridFunction, domain_mask=None) -> H1KinResult:
    """Kinetic H^1 seminorm of g over the masked region.

    g must live on ("t", "x", "v") axes with uniform v spacing.  The mask
    (broadcastable to g.values.shape) selects the integration region;
    derivatives are evaluated with global grid data, so nodes just outside
    the mask act as the ghost layer.  A mask that windows the t axis (or
    the x axis away from the wall) must therefore stay one slab inside the
    grid wherever g is active; full-axis masks fall back to one-sided
    differences at the faces.
    """
    if g.names != ("t", "x", "v"):
        raise ValueError("expected axes (t, x, v), got %r" % (g.names,))
    t = g.axis("t").nodes
    x = g.axis("x").nodes
    va = g.axis("v")
    v = va.nodes
    dvs = np.diff(v)
    if not np.allclose(dvs, dvs[0], rtol=1e-10, atol=0.0):
        raise ValueError("v axis must be uniform for the dual solve")
    dv = float(dvs[0])
    vals = g.values

    if domain_mask is None:
        mask = np.ones(vals.shape, dtype=bool)
    else:
        mask = np.broadcast_to(np.asarray(domain_mask, dtype=bool), vals.shape)

    gmax = float(np.abs(vals).max())
    floor = SUPPORT_RTOL * max(gmax, 1e-300)
    # A mask that windows an axis must keep one in-grid ghost layer on the
    # upwind side of that axis; a mask spanning the whole axis is a full
    # domain there and gets the one-sided fallback instead.  The lower x
    # face is the physical wall, exempt by the same logic.
    spanned_t = mask.any(axis=(1, 2))
    if not spanned_t.all() and spanned_t[0] and np.any(mask[0] & (np.abs(vals[0]) > floor)):
        raise ValueError("mask touches the first time slab without ghost data")
    spanned_x = mask.any(axis=(0, 2))
    if not spanned_x.all() and spanned_x[-1] and np.any(
        mask[:, -1, :] & (np.abs(vals[:, -1, :]) > floor)
    ):
        raise ValueError("mask touches the outer x face without ghost data")

    wt = g.axis("t").trapezoid_weights()
    wx = g.axis("x").trapezoid_weights()
    wv = va.trapezoid_weights()
    w3 = wt[:, None, None] * wx[None, :, None] * wv[None, None, :]

    gv = np.gradient(vals, v, axis=2)
    grad_sq = float(np.sum(w3 * mask * gv**2))

    yg = upwind_transport(vals, t, x, v)
    nt, nx, nv = vals.shape
    first, last = _section_ranges(mask)
    rhs_rows = np.where(mask, yg, 0.0).reshape(nt * nx, nv)
    energy = _dual_energy_rows(rhs_rows, dv, first, last)
    wtx = (wt[:, None] * wx[None, :]).ravel()
    dual_sq = float(np.sum(wtx * energy))

    return H1KinResult(grad_part=np.sqrt(grad_sq), dual_part=np.sqrt(dual_sq))

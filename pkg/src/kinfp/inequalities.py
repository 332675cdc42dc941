"""Two-sided evaluation of the functional inequalities on grid data.

Each checker computes the left and right sides of one inequality for a
given grid function (or solver run) and reports the observed ratio.  The
implied constant of an inequality is estimated by sweeping a deterministic
family of test functions and taking the worst ratio; reports are plain
data suitable for JSON emission.

Window edges snap inward to grid nodes; time sub-integrals use trapezoid
quadrature on the selected nodes.
"""

from dataclasses import dataclass, field

import numpy as np

from .gridfn import Axis, GridFunction
from .group import box_contains, compose_box_inv, dilate_box
from .regions import dist_to_incoming, dist_to_outgoing
from .seminorm import h1kin_seminorm
from .solver import _mu_table, _phi_table

GAMMA_TOL = 1e-12


@dataclass
class InequalityReport:
    name: str
    lhs: float
    rhs: dict
    best_param: float
    ratio: float
    C_star: float
    worst_id: str
    resolution: tuple
    terms: dict = field(default_factory=dict)
    members: dict = field(default_factory=dict)

    def as_dict(self):
        return {
            "name": self.name,
            "lhs": self.lhs,
            "rhs": {str(k): val for k, val in self.rhs.items()},
            "best_param": self.best_param,
            "ratio": self.ratio,
            "C_star": self.C_star,
            "worst_id": self.worst_id,
            "resolution": list(self.resolution),
            "terms": self.terms,
            "members": self.members,
        }


def _ratio(lhs, rhs):
    if rhs > 0.0:
        return lhs / rhs
    return 0.0 if lhs <= 0.0 else np.inf


def _window_indices(t_nodes, lo, hi, what):
    tol = 1e-9 * max(1.0, float(t_nodes[-1] - t_nodes[0]))
    if lo < t_nodes[0] - tol or hi > t_nodes[-1] + tol:
        raise ValueError(
            "%s window [%g, %g] leaves the grid [%g, %g]"
            % (what, lo, hi, t_nodes[0], t_nodes[-1])
        )
    i0 = int(np.searchsorted(t_nodes, lo - tol))
    i1 = int(np.searchsorted(t_nodes, hi + tol)) - 1
    if i1 - i0 < 1:
        raise ValueError("%s window [%g, %g] holds fewer than two time nodes" % (what, lo, hi))
    return i0, i1


def _time_slice(g, lo, hi, what):
    i0, i1 = _window_indices(g.axis("t").nodes, lo, hi, what)
    t_sub = Axis("t", g.axis("t").nodes[i0 : i1 + 1])
    return GridFunction((t_sub,) + g.axes[1:], g.values[i0 : i1 + 1])


def _time_mask(g, lo, hi, what):
    i0, i1 = _window_indices(g.axis("t").nodes, lo, hi, what)
    mask = np.zeros(g.values.shape, dtype=bool)
    mask[i0 : i1 + 1] = True
    return mask


_REGION_MASKS = {}


def region_masks(x_axis, v_axis, R):
    """Incoming / outgoing membership masks on the (x, v) grid, memoized.

    The dist solves cost about a second on product grids of a few thousand
    nodes, and family sweeps reuse the same grid dozens of times.
    """
    key = (x_axis.nodes.tobytes(), v_axis.nodes.tobytes(), round(float(R), 12))
    if key not in _REGION_MASKS:
        X, V = np.meshgrid(x_axis.nodes, v_axis.nodes, indexing="ij")
        din = dist_to_incoming(X.ravel(), V.ravel()).reshape(X.shape)
        dout = dist_to_outgoing(X.ravel(), V.ravel()).reshape(X.shape)
        p_mask = din <= np.sqrt(R)
        o_mask = ~p_mask & (dout <= np.sqrt(R / 10.0))
        _REGION_MASKS[key] = (p_mask, o_mask)
    return _REGION_MASKS[key]


def _check_axes(g):
    if g.names != ("t", "x", "v"):
        raise ValueError("expected axes (t, x, v), got %r" % (g.names,))


def _wall_index(g):
    x0 = float(g.axis("x").nodes[0])
    if abs(x0) > 1e-12:
        raise ValueError("grid does not include the wall x = 0 (first node %g)" % x0)
    return 0


def poincare_check(g: GridFunction, R, T1, T2, member_id="-") -> InequalityReport:
    """Incoming-region Poincare inequality on [T1, T2] x P_R.

    rhs seminorm and L2 factor live on the enlarged window [T1-2R, T2];
    g must vanish on the incoming boundary set {x=0, v>0}.
    """
    _check_axes(g)
    iw = _wall_index(g)
    v = g.axis("v").nodes
    gmax = float(np.abs(g.values).max())
    trace = np.abs(g.values[:, iw, :][:, v > 0.0])
    if trace.size and trace.max() > GAMMA_TOL * max(1.0, gmax):
        raise ValueError("g does not vanish on the incoming boundary set")

    p_mask, _ = region_masks(g.axis("x"), g.axis("v"), R)
    lhs_fn = _time_slice(g, T1, T2, "lhs")
    lhs = lhs_fn.lp_norm(2, p_mask[None, :, :]) ** 2

    big = _time_mask(g, T1 - 2.0 * R, T2, "rhs")
    semi = h1kin_seminorm(g, big).total
    l2 = g.lp_norm(2, big)
    terms = {"seminorm_sq": R * semi**2, "cross": np.sqrt(R) * semi * l2}
    rhs = terms["seminorm_sq"] + terms["cross"]
    ratio = _ratio(lhs, rhs)
    return InequalityReport(
        name="poincare",
        lhs=lhs,
        rhs={float(R): rhs},
        best_param=float(R),
        ratio=ratio,
        C_star=ratio,
        worst_id=member_id,
        resolution=g.values.shape,
        terms=terms,
    )


def outgoing_check(g: GridFunction, R, T1, T2, member_id="-") -> InequalityReport:
    """Outgoing-region Poincare inequality on [T1, T2] x O_R.

    The seminorm and wall term run over [T1, T2+R]; the plain L2 factor in
    the cross term runs over the wider [T1, T2+2R].  No boundary vanishing
    is required: the wall trace enters the right side instead.
    """
    _check_axes(g)
    iw = _wall_index(g)
    _, o_mask = region_masks(g.axis("x"), g.axis("v"), R)
    lhs_fn = _time_slice(g, T1, T2, "lhs")
    lhs = lhs_fn.lp_norm(2, o_mask[None, :, :]) ** 2

    semi = h1kin_seminorm(g, _time_mask(g, T1, T2 + R, "rhs seminorm")).total
    l2 = g.lp_norm(2, _time_mask(g, T1, T2 + 2.0 * R, "rhs L2"))

    i0, i1 = _window_indices(g.axis("t").nodes, T1, T2 + R, "wall term")
    v = g.axis("v").nodes
    wv = g.axis("v").trapezoid_weights()
    speed = np.where(v < 0.0, -v, 0.0)
    flux = np.sum(g.values[i0 : i1 + 1, iw, :] ** 2 * (wv * speed)[None, :], axis=1)
    wall = float(np.trapezoid(flux, g.axis("t").nodes[i0 : i1 + 1]))

    terms = {
        "seminorm_sq": R * semi**2,
        "cross": np.sqrt(R) * semi * l2,
        "wall": R * wall,
    }
    rhs = terms["seminorm_sq"] + terms["cross"] + terms["wall"]
    ratio = _ratio(lhs, rhs)
    return InequalityReport(
        name="outgoing",
        lhs=lhs,
        rhs={float(R): rhs},
        best_param=float(R),
        ratio=ratio,
        C_star=ratio,
        worst_id=member_id,
        resolution=g.values.shape,
        terms=terms,
    )


def _box_slices(g, box, what):
    idx = []
    for ax, (lo, hi) in zip(g.axes, box):
        nodes = ax.nodes
        tol = 1e-9 * max(1.0, float(nodes[-1] - nodes[0]))
        if lo < nodes[0] - tol or hi > nodes[-1] + tol:
            raise ValueError("%s box leaves the grid along %s" % (what, ax.name))
        i0 = int(np.searchsorted(nodes, lo - tol))
        i1 = int(np.searchsorted(nodes, hi + tol)) - 1
        if i1 - i0 < 1:
            raise ValueError("%s box too thin along %s" % (what, ax.name))
        idx.append((i0, i1))
    return idx


def _box_subgrid(g, box, what):
    idx = _box_slices(g, box, what)
    axes = tuple(
        Axis(ax.name, ax.nodes[i0 : i1 + 1]) for ax, (i0, i1) in zip(g.axes, idx)
    )
    sl = tuple(slice(i0, i1 + 1) for i0, i1 in idx)
    return GridFunction(axes, g.values[sl])


def _box_mask(g, box, what):
    idx = _box_slices(g, box, what)
    mask = np.zeros(g.values.shape, dtype=bool)
    mask[tuple(slice(i0, i1 + 1) for i0, i1 in idx)] = True
    return mask


def nash_check(g: GridFunction, box1, box2, B, s_list, member_id="-") -> InequalityReport:
    """Whole-space Nash inequality between nested group boxes.

    ||g||^2_{L2(box1)} <= C [ s [g]_{box2} ||g||_{L2(box2)} + s^-6 ||g||^2_{L1(box2)} ]
    for every s with box1 o (delta_s B)^-1 inside box2.  The rhs is
    evaluated per s and the report keeps the whole curve.
    """
    _check_axes(g)
    s_list = [float(s) for s in s_list]
    if not s_list or min(s_list) <= 0.0:
        raise ValueError("s_list must hold positive scales")
    for s in s_list:
        hull = compose_box_inv(box1, dilate_box(s, B))
        if not box_contains(box2, hull):
            raise ValueError("domain containment fails at s = %g" % s)

    sub1 = _box_subgrid(g, box1, "lhs")
    lhs = sub1.lp_norm(2) ** 2

    mask2 = _box_mask(g, box2, "rhs")
    semi = h1kin_seminorm(g, mask2).total
    sub2 = _box_subgrid(g, box2, "rhs")
    l2 = sub2.lp_norm(2)
    l1 = sub2.lp_norm(1)

    rhs = {s: s * semi * l2 + s ** (-6.0) * l1**2 for s in s_list}
    best = min(rhs, key=rhs.get)
    ratio = _ratio(lhs, rhs[best])
    return InequalityReport(
        name="nash",
        lhs=lhs,
        rhs=rhs,
        best_param=best,
        ratio=ratio,
        C_star=ratio,
        worst_id=member_id,
        resolution=g.values.shape,
        terms={"seminorm": semi, "l2": l2, "l1": l1},
    )


def _match_mu_key(wmu, R):
    for key in wmu:
        if abs(key - R) <= 1e-9:
            return key
    raise ValueError("missing diagnostics channel: wmu for R = %g" % R)


def combined_check(f_run, R, delta, T1, T2, profile, weightspec) -> InequalityReport:
    """Combined functional estimate on a half-space solver run.

    f_run is the (GridFunction, Diagnostics) pair from evolve with frames
    kept and R tracked.  Left side: energy on [T1, T2] minus delta times
    energy on [T1-2R, T2].  Right side: the seminorm on [T1-2R, T2+R]
    weighted by R/delta, the wall flux on [T1, T2+R] weighted by R, and
    the two squared initial pairings with the d=1 window weights
    (T2-T1)^4/R^{11/2} + R^{-3/2} and (T2-T1)^2/R^3.
    """
    _, diag = f_run
    R = float(R)
    delta = float(delta)
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must sit in (0, 1)")
    if T1 <= 2.0 * R:
        raise ValueError("combined estimate needs T1 > 2R")
    if T2 <= T1:
        raise ValueError("combined estimate needs T2 > T1")
    if diag.frames is None:
        raise ValueError("missing diagnostics channel: frames")
    if diag.wphi is None:
        raise ValueError("missing diagnostics channel: wphi")
    if weightspec.R != R:
        raise ValueError("weightspec.R = %g does not match R = %g" % (weightspec.R, R))
    mu_key = _match_mu_key(diag.wmu, R)

    t = diag.t
    i0, i1 = _window_indices(t, T1, T2, "lhs")
    j0, j1 = _window_indices(t, T1 - 2.0 * R, T2, "delta")
    k0, k1 = _window_indices(t, T1, T2 + R, "wall")
    energy_main = float(np.trapezoid(diag.energy[i0 : i1 + 1], t[i0 : i1 + 1]))
    energy_delta = float(np.trapezoid(diag.energy[j0 : j1 + 1], t[j0 : j1 + 1]))
    lhs = energy_main - delta * energy_delta

    frames = diag.frames
    semi = h1kin_seminorm(frames, _time_mask(frames, T1 - 2.0 * R, T2 + R, "seminorm")).total
    wall = float(np.trapezoid(diag.wall_sq[k0 : k1 + 1], t[k0 : k1 + 1]))

    phi0 = float(diag.wphi[0])
    mu0 = float(diag.wmu[mu_key][0])
    f0 = frames.values[0]
    xn = frames.axis("x").nodes
    vn = frames.axis("v").nodes
    wgrid = (
        frames.axis("x").trapezoid_weights()[:, None]
        * frames.axis("v").trapezoid_weights()[None, :]
    )
    phi_direct = float(np.sum(wgrid * f0 * _phi_table(profile, xn, vn)))
    mu_direct = float(np.sum(wgrid * f0 * _mu_table(weightspec, xn, vn)))
    for got, want, label in ((phi_direct, phi0, "wphi"), (mu_direct, mu0, "wmu")):
        scale = max(abs(want), 1e-300)
        if abs(got - want) > 0.01 * scale:
            raise ValueError(
                "stored %s[0] = %g disagrees with the supplied profile/weight (%g)"
                % (label, want, got)
            )

    window = T2 - T1
    terms = {
        "seminorm_sq": (R / delta) * semi**2,
        "wall": R * wall,
        "phi_pairing": (window**4 / R**5.5 + R**-1.5) * phi0**2,
        "mu_pairing": (window**2 / R**3) * mu0**2,
    }
    terms["mu_dominates_phi"] = bool(terms["mu_pairing"] > terms["phi_pairing"])
    rhs = terms["seminorm_sq"] + terms["wall"] + terms["phi_pairing"] + terms["mu_pairing"]
    ratio = _ratio(max(lhs, 0.0), rhs)
    return InequalityReport(
        name="combined",
        lhs=lhs,
        rhs={R: rhs},
        best_param=R,
        ratio=ratio,
        C_star=ratio,
        worst_id="-",
        resolution=frames.values.shape,
        terms=terms,
    )


def _smooth_far_taper(frac):
    out = np.ones_like(frac)
    ramp = np.clip((frac - 0.6) / 0.4, 0.0, 1.0)
    return out * np.cos(0.5 * np.pi * ramp) ** 2


def _family_axes_windows(axes, wall_active):
    t, x, v = axes
    tf = (t.nodes - t.nodes[0]) / (t.nodes[-1] - t.nodes[0])
    xf = (x.nodes - x.nodes[0]) / (x.nodes[-1] - x.nodes[0])
    vf = (v.nodes - v.nodes[0]) / (v.nodes[-1] - v.nodes[0])
    wt = np.sin(np.pi * tf) ** 2
    wv = np.sin(np.pi * vf) ** 2
    wx = _smooth_far_taper(xf) if wall_active else np.sin(np.pi * xf) ** 2
    return wt[:, None, None] * wx[None, :, None] * wv[None, None, :]


def gaussian_family(axes, count=20, wall_active=False, tag="gauss"):
    """Deterministic Gaussian bumps at spread centers and scales."""
    t, x, v = axes
    window = _family_axes_windows(axes, wall_active)
    T, X, V = np.meshgrid(t.nodes, x.nodes, v.nodes, indexing="ij")
    spans = [ax.nodes[-1] - ax.nodes[0] for ax in axes]
    out = []
    golden = 0.6180339887498949
    for i in range(count):
        u1 = (i * golden + 0.11) % 1.0
        u2 = (i * golden * golden + 0.49) % 1.0
        u3 = (i * 0.7548776662466927 + 0.27) % 1.0
        tc = t.nodes[0] + (0.3 + 0.4 * u1) * spans[0]
        xc = x.nodes[0] + (0.25 + 0.5 * u2) * spans[1]
        vc = v.nodes[0] + (0.25 + 0.5 * u3) * spans[2]
        scale = (0.07, 0.11, 0.17, 0.26)[i % 4]
        vals = np.exp(
            -(((T - tc) / (scale * spans[0])) ** 2)
            - ((X - xc) / (scale * spans[1])) ** 2
            - ((V - vc) / (scale * spans[2])) ** 2
        )
        out.append(("%s-%02d" % (tag, i), GridFunction(axes, vals * window)))
    return out


def bandlimited_family(axes, count=30, seed=0, modes=3, wall_active=False, tag="band"):
    """Seeded random trigonometric polynomials under a smooth box window."""
    t, x, v = axes
    window = _family_axes_windows(axes, wall_active)
    tf = (t.nodes - t.nodes[0]) / (t.nodes[-1] - t.nodes[0])
    xf = (x.nodes - x.nodes[0]) / (x.nodes[-1] - x.nodes[0])
    vf = (v.nodes - v.nodes[0]) / (v.nodes[-1] - v.nodes[0])
    TF, XF, VF = np.meshgrid(tf, xf, vf, indexing="ij")
    rng = np.random.default_rng(seed)
    out = []
    for i in range(count):
        vals = np.zeros(TF.shape)
        for _ in range(6):
            k = rng.integers(0, modes + 1, size=3)
            amp = rng.normal()
            phase = rng.uniform(0.0, 2.0 * np.pi)
            vals += amp * np.cos(2.0 * np.pi * (k[0] * TF + k[1] * XF + k[2] * VF) + phase)
        vals *= window
        peak = np.abs(vals).max()
        if peak > 0.0:
            vals /= peak
        out.append(("%s-%02d" % (tag, i), GridFunction(axes, vals)))
    return out


def constant_sweep(check, family, **kwargs):
    """Run one checker over a family; C* is the worst lhs/rhs ratio seen."""
    worst = None
    members = {}
    for fid, g in family:
        rep = check(g, member_id=fid, **kwargs)
        members[fid] = {
            "lhs": rep.lhs,
            "rhs": {str(k): val for k, val in rep.rhs.items()},
            "ratio": rep.ratio,
        }
        if worst is None or rep.ratio > worst.ratio:
            worst = rep
    if worst is None:
        raise ValueError("empty family")
    return InequalityReport(
        name=worst.name,
        lhs=worst.lhs,
        rhs=worst.rhs,
        best_param=worst.best_param,
        ratio=worst.ratio,
        C_star=worst.ratio,
        worst_id=worst.worst_id,
        resolution=worst.resolution,
        terms=worst.terms,
        members=members,
    )

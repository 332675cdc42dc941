"""Deterministic solver for the d=1 kinetic Fokker-Planck equation.

Half-space mode evolves (d_t + v d_x) f = d_v(a d_v f) on x in (0, X_max)
with the absorbing condition f(t, 0, v) = 0 for v > 0 and free outflow
through the wall for v < 0; whole-space mode drops the wall and runs on
x in (-X_max, X_max).  Velocity is truncated to (-V_max, V_max) with
homogeneous Dirichlet walls.

Strang composition per step: half diffusion, full transport, half
diffusion.  Transport is semi-Lagrangian along exact characteristics, so
its only error is interpolation; the step operator is precomputed once
since the feet x - v*dt do not move.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .gridfn import Axis, GridFunction
from .kernels import advect_apply, thomas_many, thomas_shared
from .profile import solve_profile, eval_phi_adjoint
from .weights import make_weight_spec, eval_mu_tilde


@dataclass(frozen=True)
class GaussianBump:
    """Initial condition amp * exp(-(x-x0)^2/(2 sx^2) - (v-v0)^2/(2 sv^2))."""

    x0: float
    v0: float
    sx: float = 0.5
    sv: float = 0.5
    amp: float = 1.0

    def __call__(self, x, v):
        return self.amp * np.exp(
            -((x - self.x0) ** 2) / (2.0 * self.sx**2)
            - ((v - self.v0) ** 2) / (2.0 * self.sv**2)
        )


@dataclass
class SolverConfig:
    mode: str = "half-space"  # or "whole-space"
    X_max: float = 12.0
    V_max: float = 8.0
    N_x: int = 160
    N_v: int = 129
    x_ratio: float | None = 1.05  # geometric grading toward the wall; None = uniform
    dt: float = 5e-3
    t_end: float = 1.0
    a_field: object = None  # None -> constant 1; else callable a(t, x, v)
    f_in: object = None  # GaussianBump, callable (x, v) -> values, or array
    n_outputs: int = 33
    R_list: tuple = ()
    keep_frames: bool = False

    def __post_init__(self):
        if self.mode not in ("half-space", "whole-space"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.dt <= 0.0 or self.t_end <= 0.0:
            raise ValueError("dt and t_end must be positive")
        if self.X_max <= 0.0 or self.V_max <= 0.0:
            raise ValueError("box extents must be positive")
        if self.N_x < 8 or self.N_v < 8:
            raise ValueError("grid too small")
        if self.mode == "whole-space" and self.x_ratio is not None:
            raise ValueError("grading is a wall feature; whole-space is uniform")
        n = self.t_end / self.dt
        if abs(n - round(n)) > 1e-9 * max(1.0, n):
            raise ValueError("t_end must be an integer number of steps")


class SolverBlowup(ArithmeticError):
    """Raised when the field stops being finite; carries last-good data."""

    def __init__(self, message, diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics


def build_x_axis(config) -> Axis:
    if config.mode == "whole-space":
        return Axis.uniform("x", -config.X_max, config.X_max, config.N_x)
    if config.x_ratio is None:
        return Axis.uniform("x", 0.0, config.X_max, config.N_x)
    r = config.x_ratio
    if r <= 1.0:
        raise ValueError("grading ratio must exceed 1")
    # nodes 0 = x_0 < ... < x_{N-1} = X_max with cell k of width h0 * r^k
    k = np.arange(config.N_x, dtype=float)
    nodes = config.X_max * (r**k - 1.0) / (r ** (config.N_x - 1) - 1.0)
    nodes[0] = 0.0
    nodes[-1] = config.X_max
    return Axis("x", nodes)


def build_v_axis(config) -> Axis:
    return Axis.uniform("v", -config.V_max, config.V_max, config.N_v)


def _initial_values(config, x, v):
    f_in = config.f_in
    if f_in is None:
        raise ValueError("config.f_in is required")
    if isinstance(f_in, np.ndarray):
        if f_in.shape != (x.size, v.size):
            raise ValueError("f_in table does not match the grid")
        vals = np.array(f_in, dtype=float)
    else:
        vals = np.asarray(f_in(x[:, None], v[None, :]), dtype=float)
    if not np.all(np.isfinite(vals)):
        raise ValueError("f_in must be finite")
    if np.any(vals < 0.0):
        raise ValueError("f_in must be nonnegative")
    peak = vals.max()
    if peak == 0.0:
        return vals
    edge = max(
        vals[0, :].max() if config.mode == "whole-space" else 0.0,
        vals[-1, :].max(),
        vals[:, 0].max(),
        vals[:, -1].max(),
    )
    if edge > 1e-10 * peak:
        raise ValueError("f_in is not compactly supported inside the box")
    return vals


# ---------------------------------------------------------------------------
# transport


class TransportPlan:
    """Precomputed semi-Lagrangian step: cubic Lagrange gather at the feet.

    Feet leaving through x = 0 carry the absorbing value 0 (only v > 0
    rows can do that going backward); feet beyond X_max carry 0 too, which
    is the truncation inflow.  clip_mode 0 is the plain gather, whose row
    sums telescope exactly on a uniform grid (whole-space runs); clip_mode
    1 floors undershoots at zero and reports the mass so added; clip_mode 2
    clips to the foot cell's value range.  The wall runs use the floor:
    the full monotone clip bleeds a step-count-proportional amount of the
    adjoint pairing out of the boundary layer and never converges it away.
    """

    def __init__(self, x_nodes, v_nodes, dt, clip_mode):
        Nx = x_nodes.size
        feet = x_nodes[:, None] - dt * v_nodes[None, :]
        inside = (feet >= x_nodes[0]) & (feet <= x_nodes[-1])
        self.zero_mask = (~inside).astype(np.uint8)
        safe = np.clip(feet, x_nodes[0], x_nodes[-1])
        cell = np.clip(np.searchsorted(x_nodes, safe) - 1, 0, Nx - 2)
        base = np.clip(cell - 1, 0, Nx - 4)
        xk = x_nodes[base[:, :, None] + np.arange(4)[None, None, :]]
        wgt = np.ones_like(xk)
        for a in range(4):
            for b in range(4):
                if a != b:
                    wgt[:, :, a] *= (safe - xk[:, :, b]) / (xk[:, :, a] - xk[:, :, b])
        self.base = base.astype(np.int32)
        self.bracket = cell.astype(np.int32)
        self.wgt = wgt
        self.clip_mode = int(clip_mode)
        self._buf = np.empty((Nx, v_nodes.size))

    def apply(self, values, clip_weights=None):
        """Step in place; with clip_weights (quadrature weights) and the
        floor mode, returns the weighted mass the floor added."""
        if self.clip_mode == 1 and clip_weights is not None:
            advect_apply(
                values, self.base, self.wgt, self.bracket, self.zero_mask,
                self._buf, 0,
            )
            neg = self._buf < 0.0
            added = float(-np.sum(clip_weights[neg] * self._buf[neg]))
            self._buf[neg] = 0.0
            values[...] = self._buf
            return added
        advect_apply(
            values, self.base, self.wgt, self.bracket, self.zero_mask,
            self._buf, self.clip_mode,
        )
        values[...] = self._buf
        return 0.0


def step_transport(f: GridFunction, dt, mode="half-space") -> GridFunction:
    """One exact-advection step f(x, v) <- f(x - v dt, v)."""
    x = f.axis("x")
    v = f.axis("v")
    vmax = max(abs(v.lo), abs(v.hi))
    if dt * vmax > np.diff(x.nodes).max() * (1.0 + 1e-12):
        raise ValueError("dt * V_max exceeds the coarsest x cell")
    plan = TransportPlan(x.nodes, v.nodes, dt, clip_mode=1 if mode == "half-space" else 0)
    out = f.values.copy()
    plan.apply(out)
    return GridFunction((x, v), out)


# ---------------------------------------------------------------------------
# diffusion


def _half_node_a(a_field, t, x_nodes, v_nodes):
    """Coefficient at the v half-nodes, shape (Nx, Nv-1); validates bounds."""
    vh = 0.5 * (v_nodes[:-1] + v_nodes[1:])
    if a_field is None:
        return np.ones((x_nodes.size, vh.size))
    a = np.asarray(a_field(t, x_nodes[:, None], vh[None, :]), dtype=float)
    a = np.broadcast_to(a, (x_nodes.size, vh.size)).copy()
    if not np.all(np.isfinite(a)) or a.min() <= 0.0:
        raise ValueError("coefficient field must be finite and positive")
    return a


def _cn_step(values, a_half, dt, dv):
    """Crank-Nicolson for d_t f = d_v(a d_v f), Dirichlet rows at both ends.

    values : (Nx, Nv), overwritten; a_half : (Nx, Nv-1) or (Nv-1,) shared.
    """
    Nx, Nv = values.shape
    shared = a_half.ndim == 1
    r = dt / (2.0 * dv * dv)

    if shared:
        lo = np.zeros(Nv)
        hi = np.zeros(Nv)
        lo[1:] = a_half  # a_{j-1/2} for row j
        hi[:-1] = a_half  # a_{j+1/2}
    else:
        lo = np.zeros((Nx, Nv))
        hi = np.zeros((Nx, Nv))
        lo[:, 1:] = a_half
        hi[:, :-1] = a_half
    mid = lo + hi

    if shared:
        lo_i, mid_i, hi_i = lo[1:-1], mid[1:-1], hi[1:-1]
    else:
        lo_i, mid_i, hi_i = lo[:, 1:-1], mid[:, 1:-1], hi[:, 1:-1]

    # explicit half: g = f + r (lo f_{j-1} - mid f_j + hi f_{j+1}), zero rows kept
    g = values.copy()
    g[:, 1:-1] += r * (
        lo_i * values[:, :-2] - mid_i * values[:, 1:-1] + hi_i * values[:, 2:]
    )
    g[:, 0] = 0.0
    g[:, -1] = 0.0

    if shared:
        dd = 1.0 + r * mid
        dl = -r * lo
        du = -r * hi
        dd[0] = dd[-1] = 1.0
        dl[0] = dl[-1] = 0.0
        du[0] = du[-1] = 0.0
        thomas_shared(dl, dd, du, g)
    else:
        dd = 1.0 + r * mid
        dl = -r * lo
        du = -r * hi
        dd[:, 0] = dd[:, -1] = 1.0
        dl[:, 0] = dl[:, -1] = 0.0
        du[:, 0] = du[:, -1] = 0.0
        thomas_many(dl, dd, du, g)
    values[...] = g
    return values


def step_diffusion(f: GridFunction, dt, a_field=None, t=0.0) -> GridFunction:
    """One Crank-Nicolson velocity-diffusion step with Dirichlet walls."""
    x = f.axis("x")
    v = f.axis("v")
    dv = v.spacing
    a = _half_node_a(a_field, t, x.nodes, v.nodes)
    if a_field is None or np.allclose(a, a[0:1, :], rtol=1e-13, atol=0.0):
        a = a[0].copy()  # x-independent: one shared matrix for every column
    out = f.values.copy()
    _cn_step(out, a, dt, dv)
    return GridFunction((x, v), out)


# ---------------------------------------------------------------------------
# diagnostics


@dataclass
class Diagnostics:
    """Time series of the solver's observables.

    mass       integral of f
    energy     integral of f^2
    dissipation  integral of |d_v f|^2
    wall_sq    integral over v<0 of |v| f(t,0,v)^2   (half-space)
    outflux    integral over v<0 of |v| f(t,0,v)     (half-space)
    supnorm    max of f
    wphi       integral of f * phi-weight (conserved pairing, half-space)
    wmu        per tracked R: integral of f * mu_tilde_R
    clipped    cumulative nonnegativity-clip mass removed by diffusion steps
    vtail      fraction of |f| mass in the outer 5% of velocity cells
    """

    t: np.ndarray
    mass: np.ndarray
    energy: np.ndarray
    dissipation: np.ndarray
    wall_sq: np.ndarray
    outflux: np.ndarray
    supnorm: np.ndarray
    wphi: np.ndarray | None
    wmu: dict
    clipped: np.ndarray
    vtail: np.ndarray
    energy_defect: float = np.nan
    frames: object = None

    def to_csv(self, path):
        cols = [
            ("t", self.t),
            ("mass", self.mass),
            ("energy", self.energy),
            ("dissipation", self.dissipation),
            ("wall_sq", self.wall_sq),
            ("outflux", self.outflux),
            ("supnorm", self.supnorm),
            ("clipped", self.clipped),
            ("vtail", self.vtail),
        ]
        if self.wphi is not None:
            cols.append(("wphi", self.wphi))
        for R in sorted(self.wmu):
            cols.append((f"wmu_R{R:g}", self.wmu[R]))
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([c for c, _ in cols])
            for i in range(self.t.size):
                w.writerow([f"{arr[i]:.12g}" for _, arr in cols])


def _dissipation(values, dv, wx, wv):
    dfv = np.gradient(values, dv, axis=1)
    return float(np.sum(wx[:, None] * wv[None, :] * dfv * dfv))


def _phi_table(profile, x_nodes, v_nodes):
    """Conserved-pairing weight on the grid; wall column by its limit.

    The weight solves the adjoint steady equation and vanishes on the
    outgoing rays, so the pairing integral sees nothing leave through the
    wall; its x -> 0 limit is c_minus sqrt(v_+).
    """
    tab = np.empty((x_nodes.size, v_nodes.size))
    pos = x_nodes > 0.0
    tab[pos, :] = eval_phi_adjoint(profile, x_nodes[pos][:, None], v_nodes[None, :])
    if not pos.all():
        tab[~pos, :] = profile.c_minus * np.sqrt(np.maximum(v_nodes, 0.0))[None, :]
    return tab


def _mu_table(w, x_nodes, v_nodes):
    tab = np.zeros((x_nodes.size, v_nodes.size))
    pos = x_nodes > 0.0
    tab[pos, :] = eval_mu_tilde(w, x_nodes[pos][:, None], v_nodes[None, :])
    return tab


def evolve(config: SolverConfig):
    """Run the Strang-split scheme; returns (final GridFunction, Diagnostics)."""
    xa = build_x_axis(config)
    va = build_v_axis(config)
    x, v = xa.nodes, va.nodes
    dv = va.spacing
    f = _initial_values(config, x, v)

    if config.dt * config.V_max > np.diff(x).max() * (1.0 + 1e-12):
        raise ValueError("dt * V_max exceeds the coarsest x cell")

    half = config.mode == "half-space"
    plan = TransportPlan(x, v, config.dt, clip_mode=1 if half else 0)

    a0 = _half_node_a(config.a_field, 0.0, x, v)
    a_static = config.a_field is None or np.allclose(
        a0, _half_node_a(config.a_field, config.t_end, x, v), rtol=1e-13, atol=1e-300
    )
    a_shared0 = np.allclose(a0, a0[0:1, :], rtol=1e-13, atol=0.0)

    n_steps = int(round(config.t_end / config.dt))
    every = max(1, int(np.ceil(n_steps / max(1, config.n_outputs - 1))))
    out_steps = list(range(0, n_steps + 1, every))
    if out_steps[-1] != n_steps:
        out_steps.append(n_steps)

    wx = xa.trapezoid_weights()
    wv = va.trapezoid_weights()
    wgrid = wx[:, None] * wv[None, :]
    ntail = max(1, int(0.05 * v.size))
    vneg = v < 0.0

    phi_tab = mu_tabs = None
    if half:
        prof = solve_profile()
        phi_tab = _phi_table(prof, x, v)
        mu_tabs = {R: _mu_table(make_weight_spec(R), x, v) for R in config.R_list}

    rows = {k: [] for k in (
        "t", "mass", "energy", "dissipation", "wall_sq", "outflux",
        "supnorm", "wphi", "clipped", "vtail",
    )}
    wmu_rows = {R: [] for R in config.R_list} if half else {}
    frames = [] if config.keep_frames else None
    clipped_total = 0.0

    def record(step):
        t = step * config.dt
        rows["t"].append(t)
        rows["mass"].append(float(np.sum(wgrid * f)))
        rows["energy"].append(float(np.sum(wgrid * f * f)))
        rows["dissipation"].append(_dissipation(f, dv, wx, wv))
        if half:
            bf = f[0, :]
            rows["wall_sq"].append(float(np.sum(wv[vneg] * (-v[vneg]) * bf[vneg] ** 2)))
            rows["outflux"].append(float(np.sum(wv[vneg] * (-v[vneg]) * bf[vneg])))
            rows["wphi"].append(float(np.sum(wgrid * f * phi_tab)))
            for R in config.R_list:
                wmu_rows[R].append(float(np.sum(wgrid * f * mu_tabs[R])))
        else:
            rows["wall_sq"].append(0.0)
            rows["outflux"].append(0.0)
            rows["wphi"].append(np.nan)
        rows["supnorm"].append(float(f.max()))
        rows["clipped"].append(clipped_total)
        tail = np.sum(wgrid[:, :ntail] * np.abs(f[:, :ntail])) + np.sum(
            wgrid[:, -ntail:] * np.abs(f[:, -ntail:])
        )
        rows["vtail"].append(float(tail / max(rows["mass"][-1], 1e-300)))
        if frames is not None:
            frames.append(f.copy())

    def make_diag():
        wphi_arr = np.array(rows["wphi"])
        return Diagnostics(
            t=np.array(rows["t"]),
            mass=np.array(rows["mass"]),
            energy=np.array(rows["energy"]),
            dissipation=np.array(rows["dissipation"]),
            wall_sq=np.array(rows["wall_sq"]),
            outflux=np.array(rows["outflux"]),
            supnorm=np.array(rows["supnorm"]),
            wphi=wphi_arr if half else None,
            wmu={R: np.array(series) for R, series in wmu_rows.items()},
            clipped=np.array(rows["clipped"]),
            vtail=np.array(rows["vtail"]),
        )

    record(0)
    out_next = 1
    for step in range(1, n_steps + 1):
        t0 = (step - 1) * config.dt
        if a_static and a_shared0:
            a_half = a0[0]
        elif a_static:
            a_half = a0
        else:
            a_half = _half_node_a(config.a_field, t0 + 0.25 * config.dt, x, v)
            if np.allclose(a_half, a_half[0:1, :], rtol=1e-13, atol=0.0):
                a_half = a_half[0]
        _cn_step(f, a_half, 0.5 * config.dt, dv)
        neg = f < 0.0
        if neg.any():
            clipped_total += float(-np.sum(wgrid[neg] * f[neg]))
            f[neg] = 0.0
        clipped_total += plan.apply(f, clip_weights=wgrid if half else None)
        if not a_static:
            a_half = _half_node_a(config.a_field, t0 + 0.75 * config.dt, x, v)
            if np.allclose(a_half, a_half[0:1, :], rtol=1e-13, atol=0.0):
                a_half = a_half[0]
        _cn_step(f, a_half, 0.5 * config.dt, dv)
        neg = f < 0.0
        if neg.any():
            clipped_total += float(-np.sum(wgrid[neg] * f[neg]))
            f[neg] = 0.0

        if not np.all(np.isfinite(f)):
            diag = make_diag()
            raise SolverBlowup(f"field lost finiteness at step {step}", diag)
        if out_next < len(out_steps) and step == out_steps[out_next]:
            record(step)
            out_next += 1

    diag = make_diag()
    # energy balance: E(t_end) - E(0) + 2 int D dt + int B dt ~ 0
    dE = diag.energy[-1] - diag.energy[0]
    disp = 2.0 * np.trapezoid(diag.dissipation, diag.t)
    wall = np.trapezoid(diag.wall_sq, diag.t)
    scale = max(diag.energy[0], diag.energy[-1], 1e-300)
    diag.energy_defect = float(abs(dE + disp + wall) / scale)
    if frames is not None:
        ta = Axis("t", np.array(rows["t"]))
        diag.frames = GridFunction((ta, xa, va), np.stack(frames, axis=0))
    return GridFunction((xa, va), f), diag


# ---------------------------------------------------------------------------
# profile extraction


@dataclass(frozen=True)
class ProfileSlice:
    kind: str
    coords: np.ndarray
    values: np.ndarray
    slope: float
    intercept: float
    residual_rms: float


def _nearest(nodes, q):
    i = int(np.argmin(np.abs(nodes - q)))
    return i


def extract_profile(f: GridFunction, kind, at, window) -> ProfileSlice:
    """Power-law / rate fits along one grid line.

    kind "x":    log f vs log x at fixed v = at, slope -> the x-exponent
    kind "v":    log f vs log |v| at fixed x = at over v < 0
    kind "invx": log f vs -1/x at fixed v = at > 0, slope -> the decay rate
    `window` restricts the abscissa (x, |v|, or x respectively).
    """
    from .fitting import fit_linear

    x = f.axis("x")
    v = f.axis("v")
    lo, hi = window
    if kind == "x":
        j = _nearest(v.nodes, at)
        keep = (x.nodes >= lo) & (x.nodes <= hi) & (x.nodes > 0)
        c = x.nodes[keep]
        val = f.values[keep, j]
        if np.any(val <= 0.0):
            raise ValueError("slice has nonpositive values in the fit window")
        res = fit_linear(np.log(c), np.log(val))
    elif kind == "v":
        i = _nearest(x.nodes, at)
        keep = (v.nodes < 0) & (np.abs(v.nodes) >= lo) & (np.abs(v.nodes) <= hi)
        c = np.abs(v.nodes[keep])
        val = f.values[i, keep]
        if np.any(val <= 0.0):
            raise ValueError("slice has nonpositive values in the fit window")
        res = fit_linear(np.log(c), np.log(val))
    elif kind == "invx":
        if at <= 0.0:
            raise ValueError("the rate slice needs v > 0")
        j = _nearest(v.nodes, at)
        keep = (x.nodes >= lo) & (x.nodes <= hi) & (x.nodes > 0)
        c = x.nodes[keep]
        val = f.values[keep, j]
        if np.any(val <= 0.0):
            raise ValueError("slice has nonpositive values in the fit window")
        res = fit_linear(-1.0 / c, np.log(val))
    else:
        raise ValueError(f"unknown slice kind {kind!r}")
    return ProfileSlice(
        kind=kind,
        coords=c,
        values=val,
        slope=res.slope,
        intercept=res.intercept,
        residual_rms=res.residual_rms,
    )


def snapshot_save(path, f: GridFunction):
    """Flat binary snapshot: text header (axis specs), float64 payload.

    Header lines: "kinfp-grid 1", one "axis <name> <n> <lo> <hi> <spec>" per
    axis where spec is "uniform" or "explicit" (explicit axes append their
    nodes to the payload before the values), then "end".  Payload is
    row-major with the last axis fastest.
    """
    lines = ["kinfp-grid 1"]
    explicit = []
    for a in f.axes:
        d = np.diff(a.nodes)
        if np.allclose(d, d[0], rtol=1e-12, atol=0.0):
            lines.append(f"axis {a.name} {a.num} {a.lo!r} {a.hi!r} uniform")
        else:
            lines.append(f"axis {a.name} {a.num} {a.lo!r} {a.hi!r} explicit")
            explicit.append(a.nodes)
    lines.append("end")
    header = ("\n".join(lines) + "\n").encode()
    with open(path, "wb") as fh:
        fh.write(header)
        for nodes in explicit:
            fh.write(np.ascontiguousarray(nodes, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(f.values, dtype="<f8").tobytes())


def snapshot_load(path) -> GridFunction:
    with open(path, "rb") as fh:
        blob = fh.read()
    cut = blob.index(b"end\n") + 4
    head = blob[:cut].decode().splitlines()
    if not head or head[0] != "kinfp-grid 1":
        raise ValueError("not a grid snapshot")
    axes_spec = []
    for line in head[1:-1]:
        parts = line.split()
        if parts[0] != "axis" or len(parts) != 6:
            raise ValueError(f"bad header line {line!r}")
        axes_spec.append((parts[1], int(parts[2]), float(parts[3]), float(parts[4]), parts[5]))
    payload = np.frombuffer(blob[cut:], dtype="<f8")
    pos = 0
    axes = []
    for name, n, lo, hi, spec in axes_spec:
        if spec == "uniform":
            axes.append(Axis.uniform(name, lo, hi, n))
        elif spec == "explicit":
            axes.append(Axis(name, payload[pos : pos + n].copy()))
            pos += n
        else:
            raise ValueError(f"bad axis spec {spec!r}")
    shape = tuple(a.num for a in axes)
    need = int(np.prod(shape))
    if payload.size - pos != need:
        raise ValueError("payload size does not match the axes")
    return GridFunction(axes, payload[pos:].reshape(shape).copy())

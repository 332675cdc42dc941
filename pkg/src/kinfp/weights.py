"""Exponentially decaying weight for the isolated region x1 <= -v1^3.

mu_tilde(x, v) = E(rho1) psi(rho2) psi(rho3) with

    rho1 = -Rb v1 / x1,  rho2 = -v1^3 / x1,  rho3 = -2 v1 / sqrt(Rb) - 1,

and Rb = R/10.  E is a mollification of min(1, e^(1-rho)) built so that
E''+ E' = -eta_h(rho - 1 - h) exactly, where eta_h is the mollifier: convolve
against a width-h bump and shift the argument by h.  The shift keeps the
plateau E = 1 on all of rho <= 1, and the identity pins the sign E''+E' <= 0
that drives the case-one estimate of the transport inequality.  psi is the
quintic smoothstep ramp on [1/2, 1].

E, E', E'' are tabulated (E'' through the identity, not differencing) and
cubically interpolated; past the table the exact exponential branch K e^(-rho)
takes over.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from .profile import eval_phi_adjoint

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(64)


def smoothstep(u):
    """Quintic ramp: 0 below 0, 1 above 1, C^2 across both ends."""
    u = np.clip(u, 0.0, 1.0)
    return u * u * u * (u * (6.0 * u - 15.0) + 10.0)


def smoothstep_d1(u):
    inside = (u > 0.0) & (u < 1.0)
    u = np.clip(u, 0.0, 1.0)
    return np.where(inside, 30.0 * u * u * (u - 1.0) * (u - 1.0), 0.0)


def smoothstep_d2(u):
    inside = (u > 0.0) & (u < 1.0)
    u = np.clip(u, 0.0, 1.0)
    return np.where(inside, 60.0 * u * (u - 1.0) * (2.0 * u - 1.0), 0.0)


def psi(rho):
    return smoothstep(2.0 * np.asarray(rho, dtype=float) - 1.0)


def psi_d1(rho):
    return 2.0 * smoothstep_d1(2.0 * np.asarray(rho, dtype=float) - 1.0)


def psi_d2(rho):
    return 4.0 * smoothstep_d2(2.0 * np.asarray(rho, dtype=float) - 1.0)


def _bump(y):
    # C^infinity bump on (-1, 1), unnormalized
    y = np.asarray(y, dtype=float)
    out = np.zeros(y.shape)
    inside = np.abs(y) < 1.0
    yi = y[inside]
    out[inside] = np.exp(-1.0 / (1.0 - yi * yi))
    return out


_BUMP_MASS = float(np.sum(_GL_WEIGHTS * _bump(_GL_NODES)))


def mollifier(s, h):
    """Normalized bump of width h (integral one)."""
    return _bump(np.asarray(s, dtype=float) / h) / (h * _BUMP_MASS)


def _segment_quad(fn, a, b):
    # integral of fn over [a, b] (possibly empty) by Gauss-Legendre
    if b <= a:
        return 0.0
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    return half * float(np.sum(_GL_WEIGHTS * fn(mid + half * _GL_NODES)))


@dataclass
class WeightSpec:
    R: float
    h: float
    rho_grid: np.ndarray
    E_values: np.ndarray
    E1_values: np.ndarray
    E2_values: np.ndarray
    K: float  # E = K e^(-rho) beyond the mollification band
    c_lower: float  # global min of E(rho) e^rho
    c_upper: float  # global max of E(rho) e^rho
    C_E: float  # max of |E'|/E and |E''|/E over the table
    _E: CubicHermiteSpline = field(repr=False)
    _E1: CubicHermiteSpline = field(repr=False)

    @property
    def Rbar(self):
        return self.R / 10.0


def make_weight_spec(R, h=0.05, step=1e-3, rho_max=2.0):
    """Tabulate the E profile and package the weight at scale R."""
    if R <= 0.0:
        raise ValueError("R must be positive")
    if not 0.0 < h <= 0.2:
        raise ValueError("mollification width h out of range")
    if rho_max < 1.0 + 4.0 * h:
        raise ValueError("rho_max must clear the mollification band")
    rho = np.arange(0.0, rho_max + 0.5 * step, step)
    E = np.empty(rho.size)
    E1 = np.empty(rho.size)
    for i, r in enumerate(rho):
        kink = r - 1.0 - h  # below this s the convolution sees the e^(1-.) branch
        flat = _segment_quad(lambda s: mollifier(s, h), max(kink, -h), h)
        decay = _segment_quad(
            lambda s: np.exp(1.0 - r + h + s) * mollifier(s, h), -h, min(kink, h)
        )
        E[i] = flat + decay
        E1[i] = -decay
    E2 = -E1 - mollifier(rho - 1.0 - h, h)
    K = float(np.exp(1.0 + h) * _segment_quad(lambda s: np.exp(s) * mollifier(s, h), -h, h))

    ratio = E * np.exp(rho)
    c_lower = float(min(ratio.min(), K))
    c_upper = float(max(ratio.max(), K))
    C_E = float(max(np.max(np.abs(E1) / E), np.max(np.abs(E2) / E)))

    return WeightSpec(
        R=float(R),
        h=float(h),
        rho_grid=rho,
        E_values=E,
        E1_values=E1,
        E2_values=E2,
        K=K,
        c_lower=c_lower,
        c_upper=c_upper,
        C_E=C_E,
        _E=CubicHermiteSpline(rho, E, E1),
        _E1=CubicHermiteSpline(rho, E1, E2),
    )


def _eval_table(w, spline, rho, branch_sign):
    r = np.atleast_1d(np.asarray(rho, dtype=float))
    out = np.empty(r.shape)
    lo = r <= 0.0
    hi = r >= w.rho_grid[-1]
    mid = ~lo & ~hi
    out[lo] = spline(0.0)
    out[mid] = spline(r[mid])
    out[hi] = branch_sign * w.K * np.exp(-r[hi])
    return out.reshape(np.shape(rho))


def eval_E(w, rho):
    # the spline can overshoot 1 by ~1e-11 in the first band interval; E = g*eta
    # with g <= 1 and a unit-mass kernel is genuinely confined to [0, 1]
    return np.clip(_eval_table(w, w._E, rho, 1.0), 0.0, 1.0)


def eval_E1(w, rho):
    return _eval_table(w, w._E1, rho, -1.0)


def eval_E2(w, rho):
    # through the identity E'' = -E' - eta(rho - 1 - h), which then holds
    # pointwise; a spline of E'' itself overshoots near the mollifier onset,
    # where the bump switches on faster than any polynomial tracks
    return -eval_E1(w, rho) - mollifier(np.asarray(rho, dtype=float) - 1.0 - w.h, w.h)


def _rhos(w, x1, v1):
    Rb = w.Rbar
    rho1 = -Rb * v1 / x1
    rho2 = -(v1**3) / x1
    rho3 = -2.0 * v1 / np.sqrt(Rb) - 1.0
    return rho1, rho2, rho3


def eval_mu_tilde(w, x1, v1):
    """The weight itself; zero unless v1 is moderately negative and x1 < 2|v1|^3."""
    x1 = np.asarray(x1, dtype=float)
    v1 = np.asarray(v1, dtype=float)
    x1, v1 = np.broadcast_arrays(x1, v1)
    if np.any(x1 <= 0.0):
        raise ValueError("eval_mu_tilde needs x1 > 0")
    rho1, rho2, rho3 = _rhos(w, x1, v1)
    out = eval_E(w, rho1) * psi(rho2) * psi(rho3)
    if out.ndim == 0:
        return float(out)
    return out


def eval_mu(w, x1, v1):
    """Reflected weight, mu(x, v) = mu_tilde(x, -v)."""
    return eval_mu_tilde(w, x1, np.negative(v1))


def mu_transport_lhs(w, x1, v1):
    """(d^2/dv^2 + v d/dx) mu_tilde by the chain rule on the three factors."""
    x1 = np.asarray(x1, dtype=float)
    v1 = np.asarray(v1, dtype=float)
    x1, v1 = np.broadcast_arrays(x1, v1)
    if np.any(x1 <= 0.0):
        raise ValueError("mu_transport_lhs needs x1 > 0")
    Rb = w.Rbar
    rho1, rho2, rho3 = _rhos(w, x1, v1)

    r1v = -Rb / x1
    r1x = Rb * v1 / x1**2
    r2v = -3.0 * v1**2 / x1
    r2vv = -6.0 * v1 / x1
    r2x = v1**3 / x1**2
    r3v = -2.0 / np.sqrt(Rb)

    A = eval_E(w, rho1)
    A1 = eval_E1(w, rho1)
    A2 = eval_E2(w, rho1)
    B = psi(rho2)
    B1 = psi_d1(rho2)
    B2 = psi_d2(rho2)
    C = psi(rho3)
    C1 = psi_d1(rho3)
    C2 = psi_d2(rho3)

    Av = A1 * r1v
    Avv = A2 * r1v * r1v
    Ax = A1 * r1x
    Bv = B1 * r2v
    Bvv = B2 * r2v * r2v + B1 * r2vv
    Bx = B1 * r2x
    Cv = C1 * r3v
    Cvv = C2 * r3v * r3v

    mu_vv = (
        Avv * B * C
        + A * Bvv * C
        + A * B * Cvv
        + 2.0 * (Av * Bv * C + Av * B * Cv + A * Bv * Cv)
    )
    mu_x = Ax * B * C + A * Bx * C
    out = mu_vv + v1 * mu_x
    if out.ndim == 0:
        return float(out)
    return out


# The transport inequality's proof splits the support of mu_tilde by whether
# each factor sits on its plateau or its ramp: rho1 >= 1 or < 1, rho2 >= 1 or
# in (1/2, 1), rho3 likewise.  Two of the eight sign patterns are arithmetic-
# ally impossible; the six below are sampled.  xi = -v1/sqrt(Rb).
_CASES = ("decay-11", "decay-1r", "decay-rr", "plateau-11", "plateau-r1", "plateau-rr")


def _sample_case(case, n, Rb, rng):
    eps = 1e-3
    if case == "decay-11":  # rho1 >= 1, psi's both 1
        xi = rng.uniform(1.0, 3.0, n)
        v = -xi * np.sqrt(Rb)
        x = rng.uniform(0.05, 1.0, n) * Rb * np.abs(v)
    elif case == "decay-1r":  # rho3 on the ramp forces xi < 1
        xi = rng.uniform(0.75 + eps, 1.0 - eps, n)
        v = -xi * np.sqrt(Rb)
        x = rng.uniform(0.05, 1.0, n) * np.abs(v) ** 3
    elif case == "decay-rr":  # both psi's on their ramps; xi capped so the
        # rho2 window (xi^2, 1) stays open
        xi = rng.uniform(0.75 + eps, 0.995, n)
        v = -xi * np.sqrt(Rb)
        lo = np.maximum(0.5, xi**2) + eps
        rho2 = rng.uniform(0.0, 1.0, n) * (1.0 - eps - lo) + lo
        x = np.abs(v) ** 3 / rho2
    elif case == "plateau-11":  # mu_tilde = 1 in a neighborhood
        xi = rng.uniform(1.0 + eps, 3.0, n)
        v = -xi * np.sqrt(Rb)
        u = rng.uniform(0.05, 0.95, n)
        x = Rb * np.abs(v) * (np.abs(v) ** 2 / Rb) ** u
    elif case == "plateau-r1":  # only rho2 on its ramp
        xi = rng.uniform(1.0 + eps, 3.0, n)
        v = -xi * np.sqrt(Rb)
        hi = np.minimum(1.0, xi**2) - eps
        rho2 = rng.uniform(0.0, 1.0, n) * (hi - 0.5 - eps) + 0.5 + eps
        x = np.abs(v) ** 3 / rho2
    elif case == "plateau-rr":  # needs xi in (sqrt(1/2), 1)
        xi = rng.uniform(0.75 + eps, 1.0 - eps, n)
        v = -xi * np.sqrt(Rb)
        hi = xi**2 - eps
        rho2 = rng.uniform(0.0, 1.0, n) * (hi - 0.5 - eps) + 0.5 + eps
        x = np.abs(v) ** 3 / rho2
    else:
        raise ValueError(f"unknown case {case}")
    return x, v


def case_occupancy(x1, v1, w):
    """Which (rho1, rho2, rho3) plateau/ramp pattern a point lands in."""
    rho1, rho2, rho3 = _rhos(w, x1, v1)
    a = np.where(rho1 >= 1.0, "decay", "plateau")
    b = np.where(rho2 >= 1.0, "1", "r")
    c = np.where(rho3 >= 1.0, "1", "r")
    return np.char.add(np.char.add(np.char.add(a, "-"), b), c)


def mu_inequality_check(w, profile, sample_count, seed=0):
    """Smallest C with (d_vv + v d_x) mu_tilde <= C R^(-5/4) phi on a
    stratified sample of the six occupied cases, phi being the conserved-
    pairing profile (vanishing on the outgoing boundary); also returns the
    argmax point.
    """
    rng = np.random.default_rng(seed)
    n = max(sample_count // len(_CASES), 8)
    C_best = -np.inf
    worst = (np.nan, np.nan)
    for case in _CASES:
        x, v = _sample_case(case, n, w.Rbar, rng)
        got = case_occupancy(x, v, w)
        if not np.all(got == case):
            raise AssertionError(f"sampler left case {case}: {set(got.tolist())}")
        lhs = mu_transport_lhs(w, x, v)
        phi = eval_phi_adjoint(profile, x, v)
        if np.any(phi <= 0.0):
            raise ArithmeticError("profile nonpositive on the weight support")
        ratio = lhs / (w.R**-1.25 * phi)
        i = int(np.argmax(ratio))
        if ratio[i] > C_best:
            C_best = float(ratio[i])
            worst = (float(x[i]), float(v[i]))
    return C_best, worst

# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled hot kernels: semi-Lagrangian gather, batched tridiagonal solves,
and the exact-increment Langevin particle step.  Mirrors `_kernels_py`."""

import numpy as np

cimport numpy as cnp
from libc.math cimport sqrt, INFINITY, isfinite

cnp.import_array()

BACKEND = "compiled"


def advect_apply(double[:, ::1] values, int[:, ::1] base, double[:, :, ::1] wgt,
                 int[:, ::1] bracket, unsigned char[:, ::1] zero_mask,
                 double[:, ::1] out, int clip_mode=2):
    cdef Py_ssize_t nx = values.shape[0], nv = values.shape[1]
    cdef Py_ssize_t i, j
    cdef int i0, k
    cdef double acc, fa, fb, lo, hi
    if &out[0, 0] == &values[0, 0]:
        raise ValueError("out may not alias values")
    if clip_mode < 0 or clip_mode > 2:
        raise ValueError("clip_mode must be 0 (none), 1 (floor), or 2 (monotone)")
    for i in range(nx):
        for j in range(nv):
            if zero_mask[i, j]:
                out[i, j] = 0.0
                continue
            i0 = base[i, j]
            acc = (wgt[i, j, 0] * values[i0, j]
                   + wgt[i, j, 1] * values[i0 + 1, j]
                   + wgt[i, j, 2] * values[i0 + 2, j]
                   + wgt[i, j, 3] * values[i0 + 3, j])
            if clip_mode == 2:
                k = bracket[i, j]
                fa = values[k, j]
                fb = values[k + 1, j]
                if fa < fb:
                    lo = fa; hi = fb
                else:
                    lo = fb; hi = fa
                if acc < lo:
                    acc = lo
                elif acc > hi:
                    acc = hi
            elif clip_mode == 1:
                if acc < 0.0:
                    acc = 0.0
            out[i, j] = acc
    return np.asarray(out)


def thomas_many(double[:, ::1] dl, double[:, ::1] dd, double[:, ::1] du,
                double[:, ::1] rhs):
    cdef Py_ssize_t m = dd.shape[0], n = dd.shape[1]
    cdef Py_ssize_t i, j
    cdef double piv
    cdef cnp.ndarray[double, ndim=1] cp_arr = np.empty(n)
    cdef double[::1] cp = cp_arr
    for i in range(m):
        piv = dd[i, 0]
        if piv == 0.0:
            raise ZeroDivisionError("tridiagonal pivot vanished")
        cp[0] = du[i, 0] / piv
        rhs[i, 0] = rhs[i, 0] / piv
        for j in range(1, n):
            piv = dd[i, j] - dl[i, j] * cp[j - 1]
            if piv == 0.0:
                raise ZeroDivisionError("tridiagonal pivot vanished")
            cp[j] = du[i, j] / piv
            rhs[i, j] = (rhs[i, j] - dl[i, j] * rhs[i, j - 1]) / piv
        for j in range(n - 2, -1, -1):
            rhs[i, j] = rhs[i, j] - cp[j] * rhs[i, j + 1]
    return np.asarray(rhs)


def thomas_shared(double[::1] dl, double[::1] dd, double[::1] du,
                  double[:, ::1] rhs):
    cdef Py_ssize_t m = rhs.shape[0], n = dd.shape[0]
    cdef Py_ssize_t i, j
    cdef double piv0, piv
    cdef cnp.ndarray[double, ndim=1] cp_arr = np.empty(n)
    cdef cnp.ndarray[double, ndim=1] pv_arr = np.empty(n)
    cdef double[::1] cp = cp_arr
    cdef double[::1] pv = pv_arr
    # shared forward elimination of the matrix, done once
    piv = dd[0]
    if piv == 0.0:
        raise ZeroDivisionError("tridiagonal pivot vanished")
    pv[0] = piv
    cp[0] = du[0] / piv
    for j in range(1, n):
        piv = dd[j] - dl[j] * cp[j - 1]
        if piv == 0.0:
            raise ZeroDivisionError("tridiagonal pivot vanished")
        pv[j] = piv
        cp[j] = du[j] / piv
    for i in range(m):
        rhs[i, 0] = rhs[i, 0] / pv[0]
        for j in range(1, n):
            rhs[i, j] = (rhs[i, j] - dl[j] * rhs[i, j - 1]) / pv[j]
        for j in range(n - 2, -1, -1):
            rhs[i, j] = rhs[i, j] - cp[j] * rhs[i, j + 1]
    return np.asarray(rhs)


def particle_step(double[::1] x, double[::1] v, unsigned char[::1] alive,
                  double[::1] z1, double[::1] z2, double dt, double t0,
                  double[::1] exit_t, double[::1] exit_v):
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t i
    cdef double a = sqrt(2.0 * dt)
    cdef double b = dt * sqrt(dt) / sqrt(2.0)
    cdef double c = dt * sqrt(dt) / sqrt(6.0)
    cdef double x0, v0, x1, v1, b1, b2, b3, disc, sq, uc, hval, u_neg
    cdef double lo, hi, mid, sgn
    cdef int absorbed = 0, it, s
    for i in range(n):
        if not alive[i]:
            continue
        x0 = x[i]
        v0 = v[i]
        v1 = v0 + a * z1[i]
        x1 = x0 + v0 * dt + b * z1[i] + c * z2[i]

        b1 = dt * v0
        b2 = -3.0 * x0 - 2.0 * dt * v0 + 3.0 * x1 - dt * v1
        b3 = 2.0 * x0 + dt * v0 - 2.0 * x1 + dt * v1

        u_neg = INFINITY
        if x1 <= 0.0:
            u_neg = 1.0
        disc = b2 * b2 - 3.0 * b3 * b1
        if disc >= 0.0:
            sq = sqrt(disc)
            for s in range(2):
                sgn = -1.0 if s == 0 else 1.0
                if b3 != 0.0:
                    uc = (-b2 + sgn * sq) / (3.0 * b3)
                elif b2 != 0.0:
                    uc = -b1 / (2.0 * b2)
                else:
                    uc = INFINITY
                if 0.0 < uc < 1.0:
                    hval = x0 + uc * (b1 + uc * (b2 + uc * b3))
                    if hval <= 0.0 and uc < u_neg:
                        u_neg = uc

        if isfinite(u_neg):
            lo = 0.0
            hi = u_neg
            for it in range(48):
                mid = 0.5 * (lo + hi)
                if x0 + mid * (b1 + mid * (b2 + mid * b3)) <= 0.0:
                    hi = mid
                else:
                    lo = mid
            mid = 0.5 * (lo + hi)
            exit_t[i] = t0 + mid * dt
            exit_v[i] = (b1 + mid * (2.0 * b2 + 3.0 * b3 * mid)) / dt
            alive[i] = 0
            absorbed += 1

        x[i] = x1
        v[i] = v1
    return absorbed

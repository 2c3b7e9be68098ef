# cython: boundscheck=False, wraparound=False, cdivision=True
"""Fused C loops for the per-node operator and Jacobian assembly.

Same contract as _reference.py; selected automatically at import when built.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()


cdef inline void _wedge_point(double u, double q, double p, double n,
                              double* H, double* dH_u, double* dH_q, double* dH_p) nogil:
    cdef double S = 1.0 - q * q
    cdef double S12 = sqrt(S)
    cdef double S32 = S * S12
    cdef double S52 = S * S32
    H[0] = -p / S32 - (n - 1.0) / (u * S12)
    dH_u[0] = (n - 1.0) / (u * u * S12)
    dH_q[0] = -3.0 * p * q / S52 - (n - 1.0) * q / (u * S32)
    dH_p[0] = -1.0 / S32


cdef inline void _collar_point(double u, double q, double p, double T, double n,
                               double* H, double* dH_u, double* dH_q, double* dH_p) nogil:
    cdef double Q2 = u * u - q * q
    cdef double Q = sqrt(Q2)
    cdef double Q3 = Q2 * Q
    cdef double Q5 = Q2 * Q3
    cdef double num = u * u - 2.0 * q * q + u * p
    cdef double gcross = 1.0 + q * T / u
    H[0] = -num / Q3 - (n - 1.0) * gcross / Q
    dH_u[0] = (-(2.0 * u + p) / Q3 + 3.0 * u * num / Q5
               + (n - 1.0) * q * T / (u * u * Q) + (n - 1.0) * gcross * u / Q3)
    dH_q[0] = (4.0 * q / Q3 - 3.0 * q * num / Q5
               - (n - 1.0) * T / (u * Q) - (n - 1.0) * gcross * q / Q3)
    dH_p[0] = -u / Q3


def _as_arrays(*xs):
    arrs = np.broadcast_arrays(*[np.asarray(x, dtype=np.float64) for x in xs])
    shape = arrs[0].shape
    return [np.ascontiguousarray(a).ravel() for a in arrs], shape


def wedge_H(u, du, d2u, n):
    (au, aq, ap), shape = _as_arrays(u, du, d2u)
    cdef double[::1] vu = au, vq = aq, vp = ap
    out = np.empty(vu.shape[0])
    cdef double[::1] vo = out
    cdef double H, a, b, c
    cdef double nn = float(n)
    cdef Py_ssize_t i
    for i in range(vu.shape[0]):
        _wedge_point(vu[i], vq[i], vp[i], nn, &H, &a, &b, &c)
        vo[i] = H
    return out.reshape(shape)


def collar_H(u, du, d2u, tanh_sig, n):
    (au, aq, ap, at), shape = _as_arrays(u, du, d2u, tanh_sig)
    cdef double[::1] vu = au, vq = aq, vp = ap, vt = at
    out = np.empty(vu.shape[0])
    cdef double[::1] vo = out
    cdef double H, a, b, c
    cdef double nn = float(n)
    cdef Py_ssize_t i
    for i in range(vu.shape[0]):
        _collar_point(vu[i], vq[i], vp[i], vt[i], nn, &H, &a, &b, &c)
        vo[i] = H
    return out.reshape(shape)


def wedge_H_partials(u, du, d2u, n):
    (au, aq, ap), shape = _as_arrays(u, du, d2u)
    cdef double[::1] vu = au, vq = aq, vp = ap
    cdef Py_ssize_t m = vu.shape[0], i
    H = np.empty(m); Du = np.empty(m); Dq = np.empty(m); Dp = np.empty(m)
    cdef double[::1] vH = H, vDu = Du, vDq = Dq, vDp = Dp
    cdef double nn = float(n)
    for i in range(m):
        _wedge_point(vu[i], vq[i], vp[i], nn, &vH[i], &vDu[i], &vDq[i], &vDp[i])
    return H.reshape(shape), Du.reshape(shape), Dq.reshape(shape), Dp.reshape(shape)


def collar_H_partials(u, du, d2u, tanh_sig, n):
    (au, aq, ap, at), shape = _as_arrays(u, du, d2u, tanh_sig)
    cdef double[::1] vu = au, vq = aq, vp = ap, vt = at
    cdef Py_ssize_t m = vu.shape[0], i
    H = np.empty(m); Du = np.empty(m); Dq = np.empty(m); Dp = np.empty(m)
    cdef double[::1] vH = H, vDu = Du, vDq = Dq, vDp = Dp
    cdef double nn = float(n)
    for i in range(m):
        _collar_point(vu[i], vq[i], vp[i], vt[i], nn, &vH[i], &vDu[i], &vDq[i], &vDp[i])
    return H.reshape(shape), Du.reshape(shape), Dq.reshape(shape), Dp.reshape(shape)


def wedge_interior(w, double h, n):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] aw = np.ascontiguousarray(w, dtype=np.float64)
    cdef Py_ssize_t m = aw.shape[0] - 2, i
    H = np.empty(m); lower = np.empty(m); diag = np.empty(m); upper = np.empty(m)
    cdef double[::1] vw = aw, vH = H, vl = lower, vd = diag, vup = upper
    cdef double nn = float(n)
    cdef double inv2h = 1.0 / (2.0 * h)
    cdef double invh2 = 1.0 / (h * h)
    cdef double q, p, Hi, dHu, dHq, dHp
    with nogil:
        for i in range(m):
            q = (vw[i + 2] - vw[i]) * inv2h
            p = (vw[i + 2] - 2.0 * vw[i + 1] + vw[i]) * invh2
            _wedge_point(vw[i + 1], q, p, nn, &Hi, &dHu, &dHq, &dHp)
            vH[i] = Hi
            vl[i] = -dHq * inv2h + dHp * invh2
            vd[i] = dHu - 2.0 * dHp * invh2
            vup[i] = dHq * inv2h + dHp * invh2
    return H, lower, diag, upper


def collar_interior(w, double h, n, tanh_sig):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] aw = np.ascontiguousarray(w, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] at = np.ascontiguousarray(tanh_sig, dtype=np.float64)
    cdef Py_ssize_t m = aw.shape[0] - 2, i
    H = np.empty(m); lower = np.empty(m); diag = np.empty(m); upper = np.empty(m)
    cdef double[::1] vw = aw, vt = at, vH = H, vl = lower, vd = diag, vup = upper
    cdef double nn = float(n)
    cdef double inv2h = 1.0 / (2.0 * h)
    cdef double invh2 = 1.0 / (h * h)
    cdef double q, p, Hi, dHu, dHq, dHp
    with nogil:
        for i in range(m):
            q = (vw[i + 2] - vw[i]) * inv2h
            p = (vw[i + 2] - 2.0 * vw[i + 1] + vw[i]) * invh2
            _collar_point(vw[i + 1], q, p, vt[i], nn, &Hi, &dHu, &dHq, &dHp)
            vH[i] = Hi
            vl[i] = -dHq * inv2h + dHp * invh2
            vd[i] = dHu - 2.0 * dHp * invh2
            vup[i] = dHq * inv2h + dHp * invh2
    return H, lower, diag, upper

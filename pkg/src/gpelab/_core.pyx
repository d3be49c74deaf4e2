# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled hot kernels: radial shooting integrator and flow-step field ops.

Same API and status codes as the fallback in gpelab._kernels_py.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp

cnp.import_array()

CROSSED = 1
DIVERGED = -1
RAN_OUT = 0


cdef inline void _rk4(double r, double q, double qp, double h,
                      double *q_out, double *p_out) noexcept nogil:
    cdef double k1q, k1p, k2q, k2p, k3q, k3p, k4q, k4p
    cdef double r2, q2, p2, q3, p3, r4, q4, p4
    k1q = qp
    k1p = q - q * q * q - qp / r
    r2 = r + 0.5 * h
    q2 = q + 0.5 * h * k1q
    p2 = qp + 0.5 * h * k1p
    k2q = p2
    k2p = q2 - q2 * q2 * q2 - p2 / r2
    q3 = q + 0.5 * h * k2q
    p3 = qp + 0.5 * h * k2p
    k3q = p3
    k3p = q3 - q3 * q3 * q3 - p3 / r2
    r4 = r + h
    q4 = q + h * k3q
    p4 = qp + h * k3p
    k4q = p4
    k4p = q4 - q4 * q4 * q4 - p4 / r4
    q_out[0] = q + (h / 6.0) * (k1q + 2.0 * k2q + 2.0 * k3q + k4q)
    p_out[0] = qp + (h / 6.0) * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)


def shoot_classify(double q0, double h, double r_max):
    cdef double c = 0.25 * (q0 - q0 * q0 * q0)
    cdef double q = q0 + c * h * h
    cdef double qp = 2.0 * c * h
    cdef double r = h
    cdef int status = 0
    with nogil:
        while r < r_max:
            _rk4(r, q, qp, h, &q, &qp)
            r += h
            if q <= 0.0:
                status = 1
                break
            if qp > 0.0 and r > 1.0:
                status = -1
                break
    return status


def shoot_trajectory(double q0, double h, double r_max, double q_floor):
    cdef Py_ssize_t n_max = <Py_ssize_t>(r_max / h) + 2
    qs_arr = np.empty(n_max)
    qps_arr = np.empty(n_max)
    cdef double[::1] qs = qs_arr
    cdef double[::1] qps = qps_arr
    cdef double c = 0.25 * (q0 - q0 * q0 * q0)
    cdef double q = q0 + c * h * h
    cdef double qp = 2.0 * c * h
    cdef double r = h
    cdef Py_ssize_t n = 1
    cdef int status = 0
    qs[0] = q
    qps[0] = qp
    with nogil:
        while r < r_max:
            _rk4(r, q, qp, h, &q, &qp)
            r += h
            if q <= 0.0:
                status = 1
                break
            qs[n] = q
            qps[n] = qp
            n += 1
            if qp > 0.0 and r > 1.0:
                status = -1
                break
            if q < q_floor:
                break
    return qs_arr[:n].copy(), qps_arr[:n].copy(), status


def flow_predictor(cnp.ndarray[double, ndim=2] u,
                   cnp.ndarray[double, ndim=2] exp_v,
                   cnp.ndarray[double, ndim=2] other_sq,
                   double a, double beta, double dt):
    cdef Py_ssize_t n0 = u.shape[0], n1 = u.shape[1], i, j
    cdef cnp.ndarray[double, ndim=2] out = np.empty_like(u)
    cdef double ui
    with nogil:
        for i in range(n0):
            for j in range(n1):
                ui = u[i, j]
                out[i, j] = exp_v[i, j] * ui * (
                    1.0 + dt * (a * ui * ui - beta * other_sq[i, j]))
    return out


def quartic_overlap(cnp.ndarray[double, ndim=2] u,
                    cnp.ndarray[double, ndim=2] v):
    cdef Py_ssize_t n0 = u.shape[0], n1 = u.shape[1], i, j
    cdef double s4 = 0.0, sx = 0.0, usq, vsq
    with nogil:
        for i in range(n0):
            for j in range(n1):
                usq = u[i, j] * u[i, j]
                vsq = v[i, j] * v[i, j]
                s4 += usq * usq
                sx += usq * vsq
    return s4, sx

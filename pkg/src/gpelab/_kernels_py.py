"""Pure-Python / numpy fallback for the hot kernels.

Mirrors the API of the compiled extension ``gpelab._core``; the shooting
integrator is a plain float loop, the field kernels are vectorized numpy.
Status codes for the shooting routines:

    +1  trajectory crossed zero
    -1  trajectory turned upward while still positive
     0  reached r_max positive and decreasing
"""

import numpy as np

CROSSED = 1
DIVERGED = -1
RAN_OUT = 0


def _rk4_step(r, q, qp, h):
    # q'' = q - q^3 - q'/r
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
    q_new = q + (h / 6.0) * (k1q + 2.0 * k2q + 2.0 * k3q + k4q)
    p_new = qp + (h / 6.0) * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)
    return q_new, p_new


def _series_start(q0, h):
    # removable singularity at r=0: Q(r) = Q0 + (Q0 - Q0^3) r^2/4 + O(r^4)
    c = 0.25 * (q0 - q0 * q0 * q0)
    return q0 + c * h * h, 2.0 * c * h


def shoot_classify(q0, h, r_max):
    q, qp = _series_start(q0, h)
    r = h
    while r < r_max:
        q, qp = _rk4_step(r, q, qp, h)
        r += h
        if q <= 0.0:
            return CROSSED
        if qp > 0.0 and r > 1.0:
            return DIVERGED
    return RAN_OUT


def shoot_trajectory(q0, h, r_max, q_floor):
    n_max = int(r_max / h) + 2
    qs = np.empty(n_max)
    qps = np.empty(n_max)
    q, qp = _series_start(q0, h)
    qs[0] = q
    qps[0] = qp
    n = 1
    r = h
    status = RAN_OUT
    while r < r_max:
        q, qp = _rk4_step(r, q, qp, h)
        r += h
        if q <= 0.0:
            status = CROSSED
            break
        qs[n] = q
        qps[n] = qp
        n += 1
        if qp > 0.0 and r > 1.0:
            status = DIVERGED
            break
        if q < q_floor:
            break
    return qs[:n].copy(), qps[:n].copy(), status


def flow_predictor(u, exp_v, other_sq, a, beta, dt):
    """Explicit nonlinear half of the flow step:

    exp(-dt V) * u * (1 + dt*(a u^2 - beta u_other^2)).
    """
    return exp_v * (u * (1.0 + dt * (a * u * u - beta * other_sq)))


def quartic_overlap(u, v):
    """Raw sums of u^4 and u^2 v^2 (quadrature weights applied by caller)."""
    usq = u * u
    return float(np.sum(usq * usq)), float(np.sum(usq * (v * v)))

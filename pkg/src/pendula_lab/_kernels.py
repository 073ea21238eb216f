"""Compiled inner loops for modal-coordinate chain dynamics.

All kernels work on a column subset ``T`` (n x m) of the modal basis and the
matching frequencies ``om`` (length m, ``om[0] == 0``).  Using the full basis
gives the full chain exactly; a subset gives a truncated model.

Conservative kernels use Strang splitting: exact harmonic flow of each mode
(drift) between half-kicks of the Morse force.  Forced/damped kernels use
classical RK4.  Kernels return the index of the first step at which the state
became non-finite, or -1.
"""

import math

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def _morse_force(T, q, eps, a, d0, out):
    # out = -eps * T^T U'(T q)
    n = T.shape[0]
    m = T.shape[1]
    for j in range(m):
        out[j] = 0.0
    for k in range(n):
        th = 0.0
        for j in range(m):
            th += T[k, j] * q[j]
        g = math.exp(-a * (1.0 + math.cos(th) - d0))
        du = 2.0 * a * (g - 1.0) * g * math.sin(th)
        for j in range(m):
            out[j] -= eps * du * T[k, j]


@njit(cache=True, nogil=True)
def _drift(om, c, s, q, p, dt):
    q[0] += dt * p[0]
    for j in range(1, q.shape[0]):
        qa = q[j]
        pa = p[j]
        q[j] = c[j] * qa + s[j] / om[j] * pa
        p[j] = -om[j] * s[j] * qa + c[j] * pa


# Yoshida triple-jump weights for the 4th-order composition
_W1 = 1.0 / (2.0 - 2.0 ** (1.0 / 3.0))
_W0 = 1.0 - 2.0 * _W1


@njit(cache=True, nogil=True)
def _strang(T, om, q, p, F, eps, a, d0, h, c, s):
    # one kick-drift-kick step of size h; F holds the force at q on entry and exit
    m = q.shape[0]
    for j in range(m):
        p[j] += 0.5 * h * F[j]
    _drift(om, c, s, q, p, h)
    _morse_force(T, q, eps, a, d0, F)
    for j in range(m):
        p[j] += 0.5 * h * F[j]


@njit(cache=True, nogil=True)
def split_run(T, om, q, p, eps, a, d0, dt, nsteps, stride, out, order=2):
    """Integrate in place, writing ``[q, p]`` every ``stride`` steps into ``out``.

    ``order=4`` composes three Strang substeps (Yoshida) per step.
    """
    m = q.shape[0]
    if order == 4:
        h1 = _W1 * dt
        h0 = _W0 * dt
    else:
        h1 = dt
        h0 = 0.0
    c1 = np.cos(om * h1)
    s1 = np.sin(om * h1)
    c0 = np.cos(om * h0)
    s0 = np.sin(om * h0)
    F = np.empty(m)
    _morse_force(T, q, eps, a, d0, F)
    row = 0
    out[row, :m] = q
    out[row, m:] = p
    for step in range(1, nsteps + 1):
        _strang(T, om, q, p, F, eps, a, d0, h1, c1, s1)
        if order == 4:
            _strang(T, om, q, p, F, eps, a, d0, h0, c0, s0)
            _strang(T, om, q, p, F, eps, a, d0, h1, c1, s1)
        acc = 0.0
        for j in range(m):
            acc += q[j] + p[j]
        if not math.isfinite(acc):
            return step
        if step % stride == 0:
            row += 1
            out[row, :m] = q
            out[row, m:] = p
    return -1


@njit(cache=True, nogil=True)
def split_first_crossing(T, om, q, p, eps, a, d0, dt, nsteps, start_sign):
    """Integrate until ``q[0]`` leaves the ``start_sign`` side.

    Returns ``(time, failed_step)``: the linearly interpolated crossing time
    or -1.0 if none within ``nsteps``.
    """
    m = q.shape[0]
    c = np.cos(om * dt)
    s = np.sin(om * dt)
    F = np.empty(m)
    _morse_force(T, q, eps, a, d0, F)
    prev = q[0]
    if prev * start_sign <= 0.0:
        return 0.0, -1
    for step in range(1, nsteps + 1):
        for j in range(m):
            p[j] += 0.5 * dt * F[j]
        _drift(om, c, s, q, p, dt)
        _morse_force(T, q, eps, a, d0, F)
        acc = 0.0
        for j in range(m):
            p[j] += 0.5 * dt * F[j]
            acc += q[j] + p[j]
        if not math.isfinite(acc):
            return -1.0, step
        cur = q[0]
        if cur * start_sign <= 0.0:
            return (step - 1 + prev / (prev - cur)) * dt, -1
        prev = cur
    return -1.0, -1


@njit(cache=True, nogil=True)
def _forced_rhs(T, om, y, t, eps, a, d0, f, Omega, mu, F, dy):
    m = om.shape[0]
    q = y[:m]
    _morse_force(T, q, eps, a, d0, F)
    drive = eps * f * math.cos(Omega * t)
    for j in range(m):
        pj = y[m + j]
        dy[j] = pj
        dy[m + j] = -om[j] * om[j] * q[j] + F[j] + drive * q[j] - eps * mu * pj


@njit(cache=True, nogil=True)
def rk4_run(T, om, y, t0, eps, a, d0, f, Omega, mu, dt, nsteps, stride, out):
    m = om.shape[0]
    F = np.empty(m)
    k1 = np.empty(2 * m)
    k2 = np.empty(2 * m)
    k3 = np.empty(2 * m)
    k4 = np.empty(2 * m)
    tmp = np.empty(2 * m)
    row = 0
    out[row, :] = y
    for step in range(1, nsteps + 1):
        t = t0 + (step - 1) * dt
        _forced_rhs(T, om, y, t, eps, a, d0, f, Omega, mu, F, k1)
        for i in range(2 * m):
            tmp[i] = y[i] + 0.5 * dt * k1[i]
        _forced_rhs(T, om, tmp, t + 0.5 * dt, eps, a, d0, f, Omega, mu, F, k2)
        for i in range(2 * m):
            tmp[i] = y[i] + 0.5 * dt * k2[i]
        _forced_rhs(T, om, tmp, t + 0.5 * dt, eps, a, d0, f, Omega, mu, F, k3)
        for i in range(2 * m):
            tmp[i] = y[i] + dt * k3[i]
        _forced_rhs(T, om, tmp, t + dt, eps, a, d0, f, Omega, mu, F, k4)
        acc = 0.0
        for i in range(2 * m):
            y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
            acc += y[i]
        if not math.isfinite(acc):
            return step
        if step % stride == 0:
            row += 1
            out[row, :] = y
    return -1


@njit(cache=True, nogil=True)
def _bath_force(T, om_bath, A, B, Q0, t, eps, a, d0):
    n = T.shape[0]
    nb = om_bath.shape[0]
    Qb = np.empty(nb)
    for j in range(nb):
        w = om_bath[j]
        Qb[j] = A[j] * math.cos(w * t) + B[j] / w * math.sin(w * t)
    force = 0.0
    for k in range(n):
        th = T[k, 0] * Q0
        for j in range(nb):
            th += T[k, j + 1] * Qb[j]
        g = math.exp(-a * (1.0 + math.cos(th) - d0))
        force -= eps * 2.0 * a * (g - 1.0) * g * math.sin(th) * T[k, 0]
    return force


@njit(cache=True, nogil=True)
def bath_split_run(T, om_bath, A, B, y, t0, eps, a, d0, dt, nsteps, stride, out):
    """Kick-drift-kick for the reactive mode driven by a frozen harmonic bath."""
    Q0 = y[0]
    P0 = y[1]
    row = 0
    out[row, 0] = Q0
    out[row, 1] = P0
    F = _bath_force(T, om_bath, A, B, Q0, t0, eps, a, d0)
    for step in range(1, nsteps + 1):
        P0 += 0.5 * dt * F
        Q0 += dt * P0
        F = _bath_force(T, om_bath, A, B, Q0, t0 + step * dt, eps, a, d0)
        P0 += 0.5 * dt * F
        if not math.isfinite(Q0 + P0):
            return step
        if step % stride == 0:
            row += 1
            out[row, 0] = Q0
            out[row, 1] = P0
    return -1

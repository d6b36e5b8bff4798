"""Pure-Python reference kernels.

``_kernels.pyx`` mirrors these functions operation for operation; keep the two
in step when editing either one.
"""
import math

import numpy as np

# method codes
RK4 = 0
HEUN = 1
# system codes
PRINTED = 0
CANONICAL = 1
QUBIT = 2
# status codes
OK = 0
POLE = 1
RANGE = 2

_PI = math.pi
_T1 = _PI * _PI / 4.0
_T2 = _PI * _PI * _PI / 24.0
_T3 = _PI * _PI * _PI * _PI / 64.0


def _rhs(system, I, phi, gamma, k, xi, guard):
    """Return (status, I_dot, phi_dot)."""
    if system == QUBIT:
        if abs(I) > 1.0:
            return RANGE, 0.0, 0.0
        pd = 1.0
        return OK, -k * pd + xi, pd
    if abs(I) >= 1.0 - guard:
        return POLE, 0.0, 0.0
    r = math.sqrt(1.0 - I * I)
    c = math.cos(phi)
    s = math.sin(phi)
    pd = I / r * (c + s) + 1.0
    if system == PRINTED:
        idot = -r * (s + c) - 2.0 * gamma * pd + xi
    else:
        idot = r * (c - s) - 2.0 * gamma * pd + xi
    return OK, idot, pd


def propagate(method, system, I0, phi0, gamma, k, xi, hold, dt, nsteps, stride, guard):
    """Fixed-step integration of the action-angle equations of motion.

    ``xi[n // hold]`` is the noise value used throughout step ``n``.
    Returns ``(I, phi, phi_dot, n_samples, status, steps_done)``; the output
    arrays hold one sample every ``stride`` steps, starting with the initial
    state, and only the first ``n_samples`` entries are meaningful.
    """
    nout = nsteps // stride + 1
    I_out = np.empty(nout)
    phi_out = np.empty(nout)
    pd_out = np.empty(nout)
    nxi = len(xi)
    I = float(I0)
    phi = float(phi0)
    n_samples = 0
    status = OK
    step = 0
    h2 = 0.5 * dt
    h6 = dt / 6.0
    while True:
        x = xi[min(step // hold, nxi - 1)]
        st, k1i, k1p = _rhs(system, I, phi, gamma, k, x, guard)
        if st != OK:
            status = st
            break
        if step % stride == 0:
            I_out[n_samples] = I
            phi_out[n_samples] = phi
            pd_out[n_samples] = k1p
            n_samples += 1
        if step == nsteps:
            break
        if method == RK4:
            st, k2i, k2p = _rhs(system, I + h2 * k1i, phi + h2 * k1p, gamma, k, x, guard)
            if st != OK:
                status = st
                break
            st, k3i, k3p = _rhs(system, I + h2 * k2i, phi + h2 * k2p, gamma, k, x, guard)
            if st != OK:
                status = st
                break
            st, k4i, k4p = _rhs(system, I + dt * k3i, phi + dt * k3p, gamma, k, x, guard)
            if st != OK:
                status = st
                break
            I = I + h6 * (k1i + 2.0 * k2i + 2.0 * k3i + k4i)
            phi = phi + h6 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)
        else:
            st, k2i, k2p = _rhs(system, I + dt * k1i, phi + dt * k1p, gamma, k, x, guard)
            if st != OK:
                status = st
                break
            I = I + h2 * (k1i + k2i)
            phi = phi + h2 * (k1p + k2p)
        step += 1
    return I_out, phi_out, pd_out, n_samples, status, step


def thermal_kernel(xi):
    """``(2 / (3 xi)) [(1 + pi xi)^(3/2) - 1]`` elementwise; NaN below ``-1/pi``.

    ``|xi| < 1e-4`` uses the four-term Taylor series around the removable
    singularity at 0.
    """
    xi = np.asarray(xi, dtype=float)
    out = np.empty_like(xi)
    small = np.abs(xi) < 1e-4
    xs = xi[small]
    out[small] = _PI + xs * (_T1 + xs * (-_T2 + xs * _T3))
    xl = xi[~small]
    with np.errstate(invalid="ignore", divide="ignore"):
        u = np.maximum(_PI * xl, -1.0)
        out[~small] = 2.0 / (3.0 * xl) * np.expm1(1.5 * np.log1p(u))
    out[xi < -1.0 / _PI] = np.nan
    return out


def neumaier_sum(values):
    """Compensated sum in the given order."""
    total = 0.0
    comp = 0.0
    for v in values:
        v = float(v)
        t = total + v
        if abs(total) >= abs(v):
            comp += (total - t) + v
        else:
            comp += (v - t) + total
        total = t
    return total + comp

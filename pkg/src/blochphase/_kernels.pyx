# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twin of ``_kernels_py``. Same arithmetic, same ordering."""
import numpy as np
from libc.math cimport sqrt, cos, sin, fabs, expm1, log1p, NAN, M_PI

cdef enum:
    OK = 0
    POLE = 1
    RANGE = 2

cdef enum:
    RK4 = 0
    HEUN = 1

cdef enum:
    PRINTED = 0
    CANONICAL = 1
    QUBIT = 2

cdef double _T1 = M_PI * M_PI / 4.0
cdef double _T2 = M_PI * M_PI * M_PI / 24.0
cdef double _T3 = M_PI * M_PI * M_PI * M_PI / 64.0


cdef inline int _rhs(int system, double I, double phi, double gamma, double k,
                     double xi, double guard, double *idot, double *pd) noexcept nogil:
    cdef double r, c, s
    if system == QUBIT:
        if fabs(I) > 1.0:
            return RANGE
        pd[0] = 1.0
        idot[0] = -k * pd[0] + xi
        return OK
    if fabs(I) >= 1.0 - guard:
        return POLE
    r = sqrt(1.0 - I * I)
    c = cos(phi)
    s = sin(phi)
    pd[0] = I / r * (c + s) + 1.0
    if system == PRINTED:
        idot[0] = -r * (s + c) - 2.0 * gamma * pd[0] + xi
    else:
        idot[0] = r * (c - s) - 2.0 * gamma * pd[0] + xi
    return OK


def propagate(int method, int system, double I0, double phi0, double gamma, double k,
              xi_in, Py_ssize_t hold, double dt, Py_ssize_t nsteps, Py_ssize_t stride,
              double guard):
    cdef Py_ssize_t nout = nsteps // stride + 1
    I_arr = np.empty(nout)
    phi_arr = np.empty(nout)
    pd_arr = np.empty(nout)
    cdef double[::1] I_out = I_arr
    cdef double[::1] phi_out = phi_arr
    cdef double[::1] pd_out = pd_arr
    cdef double[::1] xi = np.ascontiguousarray(xi_in, dtype=np.float64)
    cdef Py_ssize_t nxi = xi.shape[0]
    cdef double I = I0, phi = phi0, x
    cdef double k1i, k1p, k2i, k2p, k3i, k3p, k4i, k4p
    cdef double h2 = 0.5 * dt, h6 = dt / 6.0
    cdef Py_ssize_t n_samples = 0, step = 0, idx
    cdef int status = OK, st
    with nogil:
        while True:
            idx = step // hold
            if idx > nxi - 1:
                idx = nxi - 1
            x = xi[idx]
            st = _rhs(system, I, phi, gamma, k, x, guard, &k1i, &k1p)
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
                st = _rhs(system, I + h2 * k1i, phi + h2 * k1p, gamma, k, x, guard, &k2i, &k2p)
                if st != OK:
                    status = st
                    break
                st = _rhs(system, I + h2 * k2i, phi + h2 * k2p, gamma, k, x, guard, &k3i, &k3p)
                if st != OK:
                    status = st
                    break
                st = _rhs(system, I + dt * k3i, phi + dt * k3p, gamma, k, x, guard, &k4i, &k4p)
                if st != OK:
                    status = st
                    break
                I = I + h6 * (k1i + 2.0 * k2i + 2.0 * k3i + k4i)
                phi = phi + h6 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)
            else:
                st = _rhs(system, I + dt * k1i, phi + dt * k1p, gamma, k, x, guard, &k2i, &k2p)
                if st != OK:
                    status = st
                    break
                I = I + h2 * (k1i + k2i)
                phi = phi + h2 * (k1p + k2p)
            step += 1
    return I_arr, phi_arr, pd_arr, n_samples, status, step


def thermal_kernel(xi_in):
    cdef double[::1] xi = np.ascontiguousarray(xi_in, dtype=np.float64).ravel()
    cdef Py_ssize_t n = xi.shape[0], i
    out_arr = np.empty(n)
    cdef double[::1] out = out_arr
    cdef double x, u
    with nogil:
        for i in range(n):
            x = xi[i]
            if x < -1.0 / M_PI:
                out[i] = NAN
            elif fabs(x) < 1e-4:
                out[i] = M_PI + x * (_T1 + x * (-_T2 + x * _T3))
            else:
                u = M_PI * x
                if u < -1.0:
                    u = -1.0
                out[i] = 2.0 / (3.0 * x) * expm1(1.5 * log1p(u))
    return out_arr.reshape(np.shape(xi_in))


def neumaier_sum(values):
    cdef double[::1] v = np.ascontiguousarray(values, dtype=np.float64).ravel()
    cdef Py_ssize_t n = v.shape[0], i
    cdef double total = 0.0, comp = 0.0, t, a
    with nogil:
        for i in range(n):
            a = v[i]
            t = total + a
            if fabs(total) >= fabs(a):
                comp += (total - t) + a
            else:
                comp += (a - t) + total
            total = t
    return total + comp

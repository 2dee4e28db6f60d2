"""Compiled hot kernels: tridiagonal CN stepping, 2-D stencil apply, PCG.

Mirrors `fallback.py`; both operate on the symmetrized operator
L~ = S L S^{-1}, S = diag(sqrt(theta)).
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

BACKEND = "compiled"


cdef void _ldl_factor(double[::1] md, double[::1] me,
                      double[::1] d, double[::1] l) noexcept:
    cdef Py_ssize_t i, n = md.shape[0]
    d[0] = md[0]
    for i in range(1, n):
        l[i - 1] = me[i - 1] / d[i - 1]
        d[i] = md[i] - l[i - 1] * me[i - 1]


cdef void _ldl_solve(double[::1] d, double[::1] l, double[::1] me,
                     double[::1] b, double[::1] x) noexcept:
    cdef Py_ssize_t i, n = d.shape[0]
    x[0] = b[0]
    for i in range(1, n):
        x[i] = b[i] - l[i - 1] * x[i - 1]
    for i in range(n):
        x[i] /= d[i]
    for i in range(n - 2, -1, -1):
        x[i] -= l[i] * x[i + 1]


def cn_heat_1d(double[::1] dsym, double[::1] esym, double[::1] sqrt_theta,
               object u0, double h, double dt, int nsteps,
               bint left_dirichlet, bint right_dirichlet):
    cdef Py_ssize_t n = dsym.shape[0]
    cdef cnp.ndarray[double, ndim=1] w_arr = \
        np.asarray(sqrt_theta) * np.asarray(u0, dtype=float)
    cdef double[::1] w = w_arr

    cdef cnp.ndarray[double, ndim=1] md_arr = np.empty(n)
    cdef cnp.ndarray[double, ndim=1] me_arr = np.empty(n - 1)
    cdef cnp.ndarray[double, ndim=1] dfac_arr = np.empty(n)
    cdef cnp.ndarray[double, ndim=1] lfac_arr = np.empty(n - 1)
    cdef cnp.ndarray[double, ndim=1] rhs_arr = np.empty(n)
    cdef double[::1] md = md_arr, me = me_arr
    cdef double[::1] dfac = dfac_arr, lfac = lfac_arr, rhs = rhs_arr
    cdef Py_ssize_t i, m
    cdef double half = 0.5 * dt

    for i in range(n):
        md[i] = 1.0 + half * dsym[i]
    for i in range(n - 1):
        me[i] = half * esym[i]
    _ldl_factor(md, me, dfac, lfac)

    cdef int nflux = (1 if left_dirichlet else 0) + (1 if right_dirichlet else 0)
    cdef cnp.ndarray[double, ndim=2] flux_arr = np.empty((nsteps, nflux))
    cdef double[:, ::1] flux = flux_arr
    cdef int col

    for m in range(nsteps):
        # rhs = (I - dt/2 L~) w
        for i in range(n):
            rhs[i] = w[i] - half * dsym[i] * w[i]
        for i in range(n - 1):
            rhs[i] -= half * esym[i] * w[i + 1]
            rhs[i + 1] -= half * esym[i] * w[i]
        _ldl_solve(dfac, lfac, me, rhs, w)
        col = 0
        if left_dirichlet:
            flux[m, col] = (9.0 * w[0] / sqrt_theta[0]
                            - w[1] / sqrt_theta[1]) / (3.0 * h)
            col += 1
        if right_dirichlet:
            flux[m, col] = (9.0 * w[n - 1] / sqrt_theta[n - 1]
                            - w[n - 2] / sqrt_theta[n - 2]) / (3.0 * h)
    return w_arr / np.asarray(sqrt_theta), flux_arr


cdef void _apply(double[:, ::1] diag, double[:, ::1] cr, double[:, ::1] cp,
                 double[:, ::1] w, double[:, ::1] out) noexcept:
    cdef Py_ssize_t nr = diag.shape[0], nphi = diag.shape[1]
    cdef Py_ssize_t i, j, jm, jp
    for i in range(nr):
        for j in range(nphi):
            jm = j - 1 if j > 0 else nphi - 1
            jp = j + 1 if j < nphi - 1 else 0
            out[i, j] = (diag[i, j] * w[i, j]
                         - cp[i, j] * w[i, jp]
                         - cp[i, jm] * w[i, jm])
            if i > 0:
                out[i, j] -= cr[i - 1, j] * w[i - 1, j]
            if i < nr - 1:
                out[i, j] -= cr[i, j] * w[i + 1, j]


def apply_sym_2d(double[:, ::1] diag, double[:, ::1] cr, double[:, ::1] cp,
                 double[:, ::1] w):
    cdef cnp.ndarray[double, ndim=2] out_arr = \
        np.empty((diag.shape[0], diag.shape[1]))
    cdef double[:, ::1] out = out_arr
    _apply(diag, cr, cp, w, out)
    return out_arr


cdef double _dot(double[:, ::1] a, double[:, ::1] b) noexcept:
    cdef Py_ssize_t i, j
    cdef double s = 0.0
    for i in range(a.shape[0]):
        for j in range(a.shape[1]):
            s += a[i, j] * b[i, j]
    return s


cdef int _pcg(double[:, ::1] diag, double[:, ::1] cr, double[:, ::1] cp,
              double shift, double scale, double[:, ::1] b,
              double[:, ::1] w, double tol, int maxiter,
              double[:, ::1] r, double[:, ::1] z, double[:, ::1] p,
              double[:, ::1] q) except -1:
    """In-place PCG on (shift*I + scale*L~) w = b; w holds the warm start."""
    cdef Py_ssize_t nr = diag.shape[0], nphi = diag.shape[1], i, j
    cdef double bnorm = _dot(b, b)
    cdef double rz, rz_new, alpha, beta, target, rnorm
    cdef int it

    if bnorm == 0.0:
        for i in range(nr):
            for j in range(nphi):
                w[i, j] = 0.0
        return 0
    target = tol * tol * bnorm

    _apply(diag, cr, cp, w, q)
    rz = 0.0
    for i in range(nr):
        for j in range(nphi):
            r[i, j] = b[i, j] - (shift * w[i, j] + scale * q[i, j])
            z[i, j] = r[i, j] / (shift + scale * diag[i, j])
            p[i, j] = z[i, j]
            rz += r[i, j] * z[i, j]
    for it in range(1, maxiter + 1):
        _apply(diag, cr, cp, p, q)
        alpha = 0.0
        for i in range(nr):
            for j in range(nphi):
                q[i, j] = shift * p[i, j] + scale * q[i, j]
                alpha += p[i, j] * q[i, j]
        alpha = rz / alpha
        rnorm = 0.0
        for i in range(nr):
            for j in range(nphi):
                w[i, j] += alpha * p[i, j]
                r[i, j] -= alpha * q[i, j]
                rnorm += r[i, j] * r[i, j]
        if rnorm <= target:
            return it
        rz_new = 0.0
        for i in range(nr):
            for j in range(nphi):
                z[i, j] = r[i, j] / (shift + scale * diag[i, j])
                rz_new += r[i, j] * z[i, j]
        beta = rz_new / rz
        for i in range(nr):
            for j in range(nphi):
                p[i, j] = z[i, j] + beta * p[i, j]
        rz = rz_new
    raise RuntimeError(f"PCG did not reach tol={tol} in {maxiter} iterations")


def pcg_sym_2d(double[:, ::1] diag, double[:, ::1] cr, double[:, ::1] cp,
               double shift, double scale, double[:, ::1] b,
               double[:, ::1] w0, double tol, int maxiter):
    cdef Py_ssize_t nr = diag.shape[0], nphi = diag.shape[1]
    cdef cnp.ndarray[double, ndim=2] w_arr = np.array(w0, dtype=float)
    cdef cnp.ndarray[double, ndim=2] r = np.empty((nr, nphi))
    cdef cnp.ndarray[double, ndim=2] z = np.empty((nr, nphi))
    cdef cnp.ndarray[double, ndim=2] p = np.empty((nr, nphi))
    cdef cnp.ndarray[double, ndim=2] q = np.empty((nr, nphi))
    cdef int it = _pcg(diag, cr, cp, shift, scale, b, w_arr, tol, maxiter,
                       r, z, p, q)
    return w_arr, it


def cn_heat_2d(double[:, ::1] diag, double[:, ::1] cr, double[:, ::1] cp,
               double[:, ::1] sqrt_theta, object u0, double h_r, double dt,
               int nsteps, bint left_dirichlet, bint right_dirichlet,
               double tol, int maxiter):
    cdef Py_ssize_t nr = diag.shape[0], nphi = diag.shape[1], i, j
    cdef cnp.ndarray[double, ndim=2] w_arr = \
        np.asarray(sqrt_theta) * np.asarray(u0, dtype=float)
    cdef double[:, ::1] w = w_arr
    cdef cnp.ndarray[double, ndim=2] rhs_arr = np.empty((nr, nphi))
    cdef cnp.ndarray[double, ndim=2] r = np.empty((nr, nphi))
    cdef cnp.ndarray[double, ndim=2] z = np.empty((nr, nphi))
    cdef cnp.ndarray[double, ndim=2] p = np.empty((nr, nphi))
    cdef cnp.ndarray[double, ndim=2] q = np.empty((nr, nphi))
    cdef double[:, ::1] rhs = rhs_arr
    cdef double half = 0.5 * dt
    cdef int nflux = ((1 if left_dirichlet else 0)
                      + (1 if right_dirichlet else 0)) * <int>nphi
    cdef cnp.ndarray[double, ndim=2] flux_arr = np.empty((nsteps, nflux))
    cdef double[:, ::1] flux = flux_arr
    cdef Py_ssize_t m
    cdef int col

    for m in range(nsteps):
        _apply(diag, cr, cp, w, rhs)
        for i in range(nr):
            for j in range(nphi):
                rhs[i, j] = w[i, j] - half * rhs[i, j]
        _pcg(diag, cr, cp, 1.0, half, rhs, w, tol, maxiter, r, z, p, q)
        col = 0
        if left_dirichlet:
            for j in range(nphi):
                flux[m, j] = (9.0 * w[0, j] / sqrt_theta[0, j]
                              - w[1, j] / sqrt_theta[1, j]) / (3.0 * h_r)
            col = <int>nphi
        if right_dirichlet:
            for j in range(nphi):
                flux[m, col + j] = (9.0 * w[nr - 1, j] / sqrt_theta[nr - 1, j]
                                    - w[nr - 2, j] / sqrt_theta[nr - 2, j]) \
                    / (3.0 * h_r)
    return w_arr / np.asarray(sqrt_theta), flux_arr

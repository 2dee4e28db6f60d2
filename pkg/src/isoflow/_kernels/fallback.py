"""Pure numpy/scipy implementations of the hot kernels.

Matches the API of the compiled module `_core`. All operators act on the
symmetrized form L~ = S L S^{-1}, S = diag(sqrt(theta)), so matrices are
symmetric positive (semi-)definite and Crank-Nicolson / CG stay in
symmetric coordinates; callers scale fields by sqrt(theta) at the edges.
"""

import numpy as np
from scipy.linalg import cho_solve_banded, cholesky_banded

BACKEND = "python"


def _apply_sym_1d(dsym, esym, w):
    out = dsym * w
    out[:-1] += esym * w[1:]
    out[1:] += esym * w[:-1]
    return out


def cn_heat_1d(dsym, esym, sqrt_theta, u0, h, dt, nsteps,
               left_dirichlet, right_dirichlet):
    """Crank-Nicolson on dw/dt = -L~ w with per-step boundary flux extraction.

    Returns (u_final, flux) where flux has one column per Dirichlet end
    (x0 first), sampled at t = dt, 2*dt, ..., nsteps*dt via the one-sided
    rule (9*u1 - u2)/(3*h) exact for quadratics vanishing at the face.
    """
    n = dsym.shape[0]
    w = sqrt_theta * np.asarray(u0, dtype=float)

    # factor M = I + dt/2 L~ once (symmetric tridiagonal, positive definite)
    ab = np.zeros((2, n))
    ab[0, 1:] = 0.5 * dt * esym
    ab[1, :] = 1.0 + 0.5 * dt * dsym
    factor = cholesky_banded(ab)

    nflux = int(left_dirichlet) + int(right_dirichlet)
    flux = np.empty((nsteps, nflux))
    for m in range(nsteps):
        rhs = w - 0.5 * dt * _apply_sym_1d(dsym, esym, w)
        w = cho_solve_banded((factor, False), rhs)
        col = 0
        if left_dirichlet:
            flux[m, col] = (9.0 * w[0] / sqrt_theta[0]
                            - w[1] / sqrt_theta[1]) / (3.0 * h)
            col += 1
        if right_dirichlet:
            flux[m, col] = (9.0 * w[n - 1] / sqrt_theta[n - 1]
                            - w[n - 2] / sqrt_theta[n - 2]) / (3.0 * h)
    return w / sqrt_theta, flux


def apply_sym_2d(diag, cr, cp, w):
    """y = L~ w for the 5-point tensor-grid stencil, periodic in axis 1."""
    out = diag * w
    out[:-1] -= cr * w[1:]
    out[1:] -= cr * w[:-1]
    out -= cp * np.roll(w, -1, axis=1)
    out -= np.roll(cp, 1, axis=1) * np.roll(w, 1, axis=1)
    return out


def pcg_sym_2d(diag, cr, cp, shift, scale, b, w0, tol, maxiter):
    """Jacobi-preconditioned CG for (shift*I + scale*L~) w = b.

    Returns (w, iterations). Convergence: ||r||_2 <= tol * ||b||_2.
    """
    mdiag = shift + scale * diag
    bnorm = np.sqrt(np.dot(b.ravel(), b.ravel()))
    w = w0.copy()
    if bnorm == 0.0:
        return np.zeros_like(b), 0
    r = b - (shift * w + scale * apply_sym_2d(diag, cr, cp, w))
    z = r / mdiag
    p = z.copy()
    rz = np.dot(r.ravel(), z.ravel())
    target = tol * bnorm
    for it in range(1, maxiter + 1):
        q = shift * p + scale * apply_sym_2d(diag, cr, cp, p)
        alpha = rz / np.dot(p.ravel(), q.ravel())
        w += alpha * p
        r -= alpha * q
        if np.sqrt(np.dot(r.ravel(), r.ravel())) <= target:
            return w, it
        z = r / mdiag
        rz_new = np.dot(r.ravel(), z.ravel())
        p = z + (rz_new / rz) * p
        rz = rz_new
    raise RuntimeError(f"PCG did not reach tol={tol} in {maxiter} iterations")


def cn_heat_2d(diag, cr, cp, sqrt_theta, u0, h_r, dt, nsteps,
               left_dirichlet, right_dirichlet, tol, maxiter):
    """Crank-Nicolson on the 2-D stencil; per-step per-angle boundary fluxes.

    flux rows are sampled at t = dt, ..., nsteps*dt; columns are the Nphi
    samples of the r_min ring (if Dirichlet) followed by the r_max ring.
    """
    nphi = diag.shape[1]
    w = sqrt_theta * np.asarray(u0, dtype=float)
    nflux = (int(left_dirichlet) + int(right_dirichlet)) * nphi
    flux = np.empty((nsteps, nflux))
    for m in range(nsteps):
        rhs = w - 0.5 * dt * apply_sym_2d(diag, cr, cp, w)
        w, _ = pcg_sym_2d(diag, cr, cp, 1.0, 0.5 * dt, rhs, w, tol, maxiter)
        col = 0
        if left_dirichlet:
            flux[m, :nphi] = (9.0 * w[0] / sqrt_theta[0]
                              - w[1] / sqrt_theta[1]) / (3.0 * h_r)
            col = nphi
        if right_dirichlet:
            flux[m, col:col + nphi] = (9.0 * w[-1] / sqrt_theta[-1]
                                       - w[-2] / sqrt_theta[-2]) / (3.0 * h_r)
    return w / sqrt_theta, flux

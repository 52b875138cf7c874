# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: blockwise cone projection and the alternating
minimization loop of the augmented Lagrangian subproblem."""
import numpy as np
from libc.math cimport sqrt, fabs, INFINITY, isfinite

cdef enum:
    _CONVERGED = 0
    _MAX_ITER = 1
    _DIVERGED = 2

CONVERGED, MAX_ITER, DIVERGED = _CONVERGED, _MAX_ITER, _DIVERGED


cdef void _project(const double[::1] y, const Py_ssize_t[::1] kinds,
                   const Py_ssize_t[::1] offsets, const Py_ssize_t[::1] dims,
                   const double[::1] lower, const double[::1] upper,
                   double[::1] out) noexcept nogil:
    cdef Py_ssize_t b, i, off, d
    cdef double t, nz, a, v
    for b in range(kinds.shape[0]):
        off = offsets[b]
        d = dims[b]
        if kinds[b] == 0:
            for i in range(off, off + d):
                out[i] = 0.0
        elif kinds[b] == 1:
            for i in range(off, off + d):
                v = y[i]
                out[i] = v if v < 0.0 else 0.0
        elif kinds[b] == 2:
            for i in range(off, off + d):
                v = y[i]
                if v < lower[i]:
                    v = lower[i]
                if v > upper[i]:
                    v = upper[i]
                out[i] = v
        else:
            t = y[off]
            nz = 0.0
            for i in range(off + 1, off + d):
                nz += y[i] * y[i]
            nz = sqrt(nz)
            if nz <= t:
                for i in range(off, off + d):
                    out[i] = y[i]
            elif nz <= -t:
                for i in range(off, off + d):
                    out[i] = 0.0
            else:
                a = 0.5 * (nz + t)
                out[off] = a
                for i in range(off + 1, off + d):
                    out[i] = (a / nz) * y[i]


def project(const double[::1] y, const Py_ssize_t[::1] kinds,
            const Py_ssize_t[::1] offsets, const Py_ssize_t[::1] dims,
            const double[::1] lower, const double[::1] upper, double[::1] out):
    _project(y, kinds, offsets, dims, lower, upper, out)


def alternating(const double[:, ::1] L, const double[:, ::1] H,
                const double[::1] h, const double[::1] b0, const double[::1] lam_r,
                double r, const Py_ssize_t[::1] kinds, const Py_ssize_t[::1] offsets,
                const Py_ssize_t[::1] dims, const double[::1] lower,
                const double[::1] upper, double[::1] x, double[::1] y,
                double tol, Py_ssize_t max_iter, double bound):
    cdef Py_ssize_t n = x.shape[0], m = y.shape[0]
    cdef Py_ssize_t it, i, j
    cdef double acc, dx, dy, res = INFINITY, xmax
    cdef double[::1] rhs = np.empty(n)
    cdef double[::1] xn = np.empty(n)
    cdef double[::1] v = np.empty(m)
    cdef double[::1] yn = np.empty(m)
    cdef int status = _MAX_ITER
    with nogil:
        it = 0
        while it < max_iter:
            it += 1
            # rhs = b0 + r H'y, then forward/back substitution with L
            for j in range(n):
                rhs[j] = b0[j]
            for i in range(m):
                acc = r * y[i]
                for j in range(n):
                    rhs[j] += H[i, j] * acc
            for i in range(n):
                acc = rhs[i]
                for j in range(i):
                    acc -= L[i, j] * xn[j]
                xn[i] = acc / L[i, i]
            for i in range(n - 1, -1, -1):
                acc = xn[i]
                for j in range(i + 1, n):
                    acc -= L[j, i] * xn[j]
                xn[i] = acc / L[i, i]
            for i in range(m):
                acc = -h[i] + lam_r[i]
                for j in range(n):
                    acc += H[i, j] * xn[j]
                v[i] = acc
            _project(v, kinds, offsets, dims, lower, upper, yn)
            dx = 0.0
            xmax = 0.0
            for j in range(n):
                acc = fabs(xn[j] - x[j])
                if acc > dx or acc != acc:
                    dx = acc
                x[j] = xn[j]
                if fabs(xn[j]) > xmax:
                    xmax = fabs(xn[j])
            dy = 0.0
            for i in range(m):
                acc = fabs(yn[i] - y[i])
                if acc > dy or acc != acc:
                    dy = acc
                y[i] = yn[i]
            res = dx if dx > dy else dy
            if not isfinite(res) or xmax > bound:
                status = _DIVERGED
                break
            if res <= tol:
                status = _CONVERGED
                break
    return it, res, status

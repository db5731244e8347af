# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled cyclic Jacobi eigensolver for stacks of small symmetric matrices.

Mirrors ``_kernels_py.jacobi_eigh_batch`` rotation for rotation; the
selector in ``_backend`` picks whichever is importable.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs

cnp.import_array()


cdef double _off_norm(double[:, ::1] a, Py_ssize_t p) noexcept nogil:
    cdef Py_ssize_t i, j
    cdef double s = 0.0
    for i in range(p):
        for j in range(i + 1, p):
            s += a[i, j] * a[i, j]
    return sqrt(2.0 * s)


cdef double _fro_norm(double[:, ::1] a, Py_ssize_t p) noexcept nogil:
    cdef Py_ssize_t i, j
    cdef double s = 0.0
    for i in range(p):
        for j in range(p):
            s += a[i, j] * a[i, j]
    return sqrt(s)


cdef int _jacobi_one(double[:, ::1] a, double[:, ::1] v, double tol,
                     int max_sweeps, double *residual) noexcept nogil:
    cdef Py_ssize_t p = a.shape[0]
    cdef Py_ssize_t i, j, r
    cdef int sweep = 0
    cdef double app, aqq, apq, theta, t, c, s, arp, arq, vrp, vrq
    cdef double limit = tol * _fro_norm(a, p)
    cdef double off

    for i in range(p):
        for j in range(p):
            v[i, j] = 1.0 if i == j else 0.0

    off = _off_norm(a, p)
    while off > limit:
        if sweep >= max_sweeps:
            residual[0] = off
            return -1
        for i in range(p):
            for j in range(i + 1, p):
                apq = a[i, j]
                if apq == 0.0:
                    continue
                app = a[i, i]
                aqq = a[j, j]
                theta = (aqq - app) / (2.0 * apq)
                if fabs(theta) > 1e150:
                    t = 0.5 / theta
                elif theta >= 0.0:
                    t = 1.0 / (theta + sqrt(theta * theta + 1.0))
                else:
                    t = -1.0 / (-theta + sqrt(theta * theta + 1.0))
                c = 1.0 / sqrt(t * t + 1.0)
                s = t * c
                for r in range(p):
                    if r == i or r == j:
                        continue
                    arp = a[r, i]
                    arq = a[r, j]
                    a[r, i] = c * arp - s * arq
                    a[r, j] = s * arp + c * arq
                    a[i, r] = a[r, i]
                    a[j, r] = a[r, j]
                a[i, i] = app - t * apq
                a[j, j] = aqq + t * apq
                a[i, j] = 0.0
                a[j, i] = 0.0
                for r in range(p):
                    vrp = v[r, i]
                    vrq = v[r, j]
                    v[r, i] = c * vrp - s * vrq
                    v[r, j] = s * vrp + c * vrq
        sweep += 1
        off = _off_norm(a, p)
    residual[0] = off
    return sweep


def jacobi_eigh_batch(double[:, :, ::1] mats, double tol, int max_sweeps):
    """Diagonalize ``mats`` (n, p, p) in place.

    Returns ``(eigenvalues, eigenvectors, sweeps, residuals)``; a sweep
    count of -1 marks a matrix that hit ``max_sweeps``. Eigenvalues are
    unsorted (diagonal order).
    """
    cdef Py_ssize_t n = mats.shape[0]
    cdef Py_ssize_t p = mats.shape[1]
    cdef Py_ssize_t k, i
    vecs_arr = np.empty((n, p, p), dtype=np.float64)
    vals_arr = np.empty((n, p), dtype=np.float64)
    sweeps_arr = np.empty(n, dtype=np.intc)
    res_arr = np.empty(n, dtype=np.float64)
    cdef double[:, :, ::1] vecs = vecs_arr
    cdef double[:, ::1] vals = vals_arr
    cdef int[::1] sweeps = sweeps_arr
    cdef double[::1] res = res_arr
    with nogil:
        for k in range(n):
            sweeps[k] = _jacobi_one(mats[k], vecs[k], tol, max_sweeps, &res[k])
            for i in range(p):
                vals[k, i] = mats[k, i, i]
    return vals_arr, vecs_arr, sweeps_arr, res_arr

# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled quadrature core: per-node pencil inversion with Kahan accumulation.

Each node assembles the complex pencil z^2 I - 2 z T0 + T2, factors it with
partially pivoted LU, builds the inverse column by column, and folds it into
the running sums entry by entry with compensated addition in strict node
order.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()


cdef inline double _abs2(double complex v) nogil:
    return v.real * v.real + v.imag * v.imag


cdef int _lu_factor(double complex[:, ::1] a, int[::1] piv, Py_ssize_t n) nogil:
    """In-place LU with partial pivoting; returns 0 on success, 1 if singular."""
    cdef Py_ssize_t col, row, k, best
    cdef double mag, cand
    cdef double complex tmp, mult
    for col in range(n):
        best = col
        mag = _abs2(a[col, col])
        for row in range(col + 1, n):
            cand = _abs2(a[row, col])
            if cand > mag:
                mag = cand
                best = row
        if mag == 0.0:
            return 1
        piv[col] = <int> best
        if best != col:
            for k in range(n):
                tmp = a[col, k]
                a[col, k] = a[best, k]
                a[best, k] = tmp
        for row in range(col + 1, n):
            mult = a[row, col] / a[col, col]
            a[row, col] = mult
            for k in range(col + 1, n):
                a[row, k] = a[row, k] - mult * a[col, k]
    return 0


cdef void _lu_inverse(double complex[:, ::1] lu, int[::1] piv,
                      double complex[::1] b, double complex[:, ::1] out,
                      Py_ssize_t n) nogil:
    """Inverse from the LU factors, one unit column at a time."""
    cdef Py_ssize_t col, i, k
    cdef double complex tmp, acc
    for col in range(n):
        for i in range(n):
            b[i] = 0.0
        b[col] = 1.0
        for i in range(n):
            k = piv[i]
            if k != i:
                tmp = b[i]
                b[i] = b[k]
                b[k] = tmp
        for i in range(n):  # forward, unit lower triangle
            acc = b[i]
            for k in range(i):
                acc = acc - lu[i, k] * b[k]
            b[i] = acc
        for i in range(n - 1, -1, -1):  # backward
            acc = b[i]
            for k in range(i + 1, n):
                acc = acc - lu[i, k] * b[k]
            b[i] = acc / lu[i, i]
        for i in range(n):
            out[i, col] = b[i]


def pencil_weighted_sums(object t0_in, object t2_in, object nodes_in, object coeffs_in):
    """Weighted sums of inverse pencils over quadrature nodes.

    Same contract as the pure backend: returns (sums, min_inv_cond).
    """
    cdef double[:, ::1] t0 = np.ascontiguousarray(t0_in, dtype=np.float64)
    cdef double[:, ::1] t2 = np.ascontiguousarray(t2_in, dtype=np.float64)
    cdef double complex[::1] nodes = np.ascontiguousarray(nodes_in, dtype=np.complex128)
    coeffs_arr = np.ascontiguousarray(np.atleast_2d(coeffs_in), dtype=np.complex128)
    cdef double complex[:, ::1] coeffs = coeffs_arr

    cdef Py_ssize_t n = t0.shape[0]
    cdef Py_ssize_t nk = nodes.shape[0]
    cdef Py_ssize_t m = coeffs.shape[0]

    sums_arr = np.zeros((m, n, n), dtype=np.complex128)
    comp_arr = np.zeros((m, n, n), dtype=np.complex128)
    cdef double complex[:, :, ::1] sums = sums_arr
    cdef double complex[:, :, ::1] comp = comp_arr

    a_arr = np.empty((n, n), dtype=np.complex128)
    x_arr = np.empty((n, n), dtype=np.complex128)
    b_arr = np.empty(n, dtype=np.complex128)
    piv_arr = np.empty(n, dtype=np.intc)
    cdef double complex[:, ::1] a = a_arr
    cdef double complex[:, ::1] x = x_arr
    cdef double complex[::1] b = b_arr
    cdef int[::1] piv = piv_arr

    cdef double min_inv_cond = np.inf
    cdef double fro_a, fro_x, cond
    cdef double complex z, z2, val, c, y, t, s
    cdef Py_ssize_t k, i, j, st
    cdef int status

    with nogil:
        for k in range(nk):
            z = nodes[k]
            z2 = z * z
            fro_a = 0.0
            for i in range(n):
                for j in range(n):
                    val = -2.0 * z * t0[i, j] + t2[i, j]
                    if i == j:
                        val = val + z2
                    a[i, j] = val
                    fro_a += _abs2(val)
            status = _lu_factor(a, piv, n)
            if status != 0:
                min_inv_cond = 0.0
                break
            _lu_inverse(a, piv, b, x, n)
            fro_x = 0.0
            for i in range(n):
                for j in range(n):
                    fro_x += _abs2(x[i, j])
            cond = 1.0 / (sqrt(fro_a) * sqrt(fro_x))
            if cond < min_inv_cond:
                min_inv_cond = cond
            for st in range(m):
                c = coeffs[st, k]
                if c.real == 0.0 and c.imag == 0.0:
                    continue
                for i in range(n):
                    for j in range(n):
                        y = c * x[i, j] - comp[st, i, j]
                        s = sums[st, i, j]
                        t = s + y
                        comp[st, i, j] = (t - s) - y
                        sums[st, i, j] = t

    return sums_arr, float(min_inv_cond)

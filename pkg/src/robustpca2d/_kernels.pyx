# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops: cyclic Jacobi sweeps and L1 polarity/flip kernels.

Every function here has a drop-in numpy twin in ``_fallback.py`` with the
same signature and return layout.
"""
import numpy as np

from libc.math cimport sqrt, fabs, copysign


cdef double _offnorm(double[:, ::1] a, Py_ssize_t n) noexcept nogil:
    cdef double acc = 0.0
    cdef Py_ssize_t p, q
    for p in range(n):
        for q in range(p + 1, n):
            acc += a[p, q] * a[p, q]
    return sqrt(2.0 * acc)


def jacobi_eigh(A, double tol, int max_sweeps):
    """Diagonalize symmetric ``A`` by cyclic Jacobi rotations.

    Returns ``(diagonal, V, sweeps, offnorm)``; ``A ≈ V diag V^T``.  Stops once
    the off-diagonal Frobenius norm drops below ``tol`` (absolute) or after
    ``max_sweeps`` full sweeps, whichever is first.
    """
    cdef double[:, ::1] a = np.array(A, dtype=np.float64, order="C", copy=True)
    cdef Py_ssize_t n = a.shape[0]
    V_arr = np.eye(n, dtype=np.float64)
    cdef double[:, ::1] v = V_arr
    cdef Py_ssize_t p, q, k
    cdef double apq, theta, t, c, s, x, y
    cdef int sweeps = 0
    cdef double off = _offnorm(a, n)
    with nogil:
        while off >= tol and sweeps < max_sweeps:
            for p in range(n - 1):
                for q in range(p + 1, n):
                    apq = a[p, q]
                    if apq == 0.0:
                        continue
                    theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                    if fabs(theta) > 1e150:
                        t = 0.5 / theta
                    else:
                        t = copysign(1.0, theta) / (fabs(theta) + sqrt(theta * theta + 1.0))
                    c = 1.0 / sqrt(t * t + 1.0)
                    s = t * c
                    for k in range(n):
                        x = a[k, p]
                        y = a[k, q]
                        a[k, p] = c * x - s * y
                        a[k, q] = s * x + c * y
                    for k in range(n):
                        x = a[p, k]
                        y = a[q, k]
                        a[p, k] = c * x - s * y
                        a[q, k] = s * x + c * y
                    a[p, q] = 0.0
                    a[q, p] = 0.0
                    for k in range(n):
                        x = v[k, p]
                        y = v[k, q]
                        v[k, p] = c * x - s * y
                        v[k, q] = s * x + c * y
            sweeps += 1
            off = _offnorm(a, n)
    diag = np.array([a[k, k] for k in range(n)], dtype=np.float64)
    return diag, V_arr, sweeps, off


def polarity_1d(Xt, w):
    """Signs of ``x_i . w`` for the rows of ``Xt`` (negative -> -1, else +1)."""
    cdef double[:, ::1] x = np.ascontiguousarray(Xt, dtype=np.float64)
    cdef double[::1] wv = np.ascontiguousarray(w, dtype=np.float64)
    cdef Py_ssize_t n = x.shape[0], d = x.shape[1], i, j
    p_arr = np.empty(n, dtype=np.int8)
    proj_arr = np.empty(n, dtype=np.float64)
    cdef signed char[::1] p = p_arr
    cdef double[::1] proj = proj_arr
    cdef double acc
    with nogil:
        for i in range(n):
            acc = 0.0
            for j in range(d):
                acc += x[i, j] * wv[j]
            proj[i] = acc
            p[i] = -1 if acc < 0.0 else 1
    return p_arr, proj_arr


def flip_sum_1d(Xt, p):
    """``sum_i p_i x_i`` over the rows of ``Xt``."""
    cdef double[:, ::1] x = np.ascontiguousarray(Xt, dtype=np.float64)
    cdef signed char[::1] pv = np.ascontiguousarray(p, dtype=np.int8)
    cdef Py_ssize_t n = x.shape[0], d = x.shape[1], i, j
    out_arr = np.zeros(d, dtype=np.float64)
    cdef double[::1] out = out_arr
    with nogil:
        for i in range(n):
            if pv[i] > 0:
                for j in range(d):
                    out[j] += x[i, j]
            else:
                for j in range(d):
                    out[j] -= x[i, j]
    return out_arr


def polarity_2d(F, w):
    """Per-image peak column of ``|w^T F_i|``.

    Returns ``(p, q, peak, l1)``: sign of the peak entry, its column index
    (first maximum wins), the signed peak value, and ``sum_i ||w^T F_i||_1``.
    """
    cdef double[:, :, ::1] f = np.ascontiguousarray(F, dtype=np.float64)
    cdef double[::1] wv = np.ascontiguousarray(w, dtype=np.float64)
    cdef Py_ssize_t n = f.shape[0], r = f.shape[1], m = f.shape[2], i, j, c
    p_arr = np.empty(n, dtype=np.int8)
    q_arr = np.empty(n, dtype=np.intp)
    peak_arr = np.empty(n, dtype=np.float64)
    row_arr = np.empty(m, dtype=np.float64)
    cdef signed char[::1] p = p_arr
    cdef Py_ssize_t[::1] q = q_arr
    cdef double[::1] peak = peak_arr
    cdef double[::1] row = row_arr
    cdef double l1 = 0.0, best, val
    cdef Py_ssize_t bi
    with nogil:
        for i in range(n):
            for c in range(m):
                row[c] = 0.0
            for j in range(r):
                for c in range(m):
                    row[c] += wv[j] * f[i, j, c]
            best = -1.0
            bi = 0
            for c in range(m):
                val = fabs(row[c])
                l1 += val
                if val > best:
                    best = val
                    bi = c
            q[i] = bi
            peak[i] = row[bi]
            p[i] = -1 if row[bi] < 0.0 else 1
    return p_arr, q_arr, peak_arr, l1


def flip_sum_2d(F, p, q):
    """``sum_i p_i F_i[:, q_i]``."""
    cdef double[:, :, ::1] f = np.ascontiguousarray(F, dtype=np.float64)
    cdef signed char[::1] pv = np.ascontiguousarray(p, dtype=np.int8)
    cdef Py_ssize_t[::1] qv = np.ascontiguousarray(q, dtype=np.intp)
    cdef Py_ssize_t n = f.shape[0], r = f.shape[1], i, j, c
    out_arr = np.zeros(r, dtype=np.float64)
    cdef double[::1] out = out_arr
    with nogil:
        for i in range(n):
            c = qv[i]
            if pv[i] > 0:
                for j in range(r):
                    out[j] += f[i, j, c]
            else:
                for j in range(r):
                    out[j] -= f[i, j, c]
    return out_arr

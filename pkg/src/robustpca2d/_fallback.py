"""Pure-Python/numpy twins of the kernels in ``_kernels.pyx``.

Selected automatically when the compiled module is missing, or on request
via ``ROBUSTPCA2D_BACKEND=python``.
"""
import math

import numpy as np


def _offnorm(a):
    upper = np.triu(a, 1)
    return math.sqrt(2.0 * float(np.sum(upper * upper)))


def jacobi_eigh(A, tol, max_sweeps):
    a = np.array(A, dtype=np.float64, order="C", copy=True)
    n = a.shape[0]
    v = np.eye(n)
    sweeps = 0
    off = _offnorm(a)
    while off >= tol and sweeps < max_sweeps:
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                x = a[:, p].copy()
                y = a[:, q]
                a[:, p] = c * x - s * y
                a[:, q] = s * x + c * y
                x = a[p, :].copy()
                y = a[q, :]
                a[p, :] = c * x - s * y
                a[q, :] = s * x + c * y
                a[p, q] = 0.0
                a[q, p] = 0.0
                x = v[:, p].copy()
                y = v[:, q]
                v[:, p] = c * x - s * y
                v[:, q] = s * x + c * y
        sweeps += 1
        off = _offnorm(a)
    return np.diag(a).copy(), v, sweeps, off


def polarity_1d(Xt, w):
    proj = np.asarray(Xt, dtype=np.float64) @ np.asarray(w, dtype=np.float64)
    p = np.where(proj < 0.0, -1, 1).astype(np.int8)
    return p, proj


def flip_sum_1d(Xt, p):
    return np.asarray(p, dtype=np.float64) @ np.asarray(Xt, dtype=np.float64)


def polarity_2d(F, w):
    rows = np.einsum("r,irc->ic", np.asarray(w, dtype=np.float64), np.asarray(F, dtype=np.float64))
    mags = np.abs(rows)
    q = np.argmax(mags, axis=1).astype(np.intp)
    peak = rows[np.arange(rows.shape[0]), q]
    p = np.where(peak < 0.0, -1, 1).astype(np.int8)
    return p, q, peak, float(mags.sum())


def flip_sum_2d(F, p, q):
    F = np.asarray(F, dtype=np.float64)
    cols = F[np.arange(F.shape[0]), :, np.asarray(q, dtype=np.intp)]
    return np.asarray(p, dtype=np.float64) @ cols

"""Dense matrix primitives: norms, orthonormal bases, Jacobi eigensolver.

Matrices are plain 2-D float64 numpy arrays; ``as_matrix`` enforces the
shape/finiteness invariants at every public entry point.
"""
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from ._backend import kernels
from .errors import (
    DimensionMismatch,
    EmptyInput,
    NoConvergence,
    NotOrthonormal,
    NotSymmetric,
    RankDeficient,
)

# Tolerances (read-only by convention).
ORTHONORMAL_TOL = 1e-8
RANK_TOL = 1e-12
EIG_OFF_TOL = 1e-12
EIG_MAX_SWEEPS = 100
SYMMETRY_TOL = 1e-10
SIGN_TIE_RTOL = 1e-12
# inputs this close to orthonormal are returned as they are (exact idempotence)
ORTHONORMAL_EXACT_TOL = 1e-13


def as_matrix(M, name="matrix"):
    """Return ``M`` as a finite 2-D float64 array with at least one entry."""
    A = np.asarray(M, dtype=np.float64)
    if A.ndim == 1:
        A = A[:, None]
    if A.ndim != 2 or A.shape[0] < 1 or A.shape[1] < 1:
        raise DimensionMismatch(f"{name} must be a non-empty 2-D array, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError(f"{name} contains NaN or Inf")
    return A


def r1_norm(M) -> float:
    """Sum of the Euclidean norms of the columns of ``M``."""
    A = as_matrix(M)
    return float(np.sum(np.sqrt(np.sum(A * A, axis=0))))


def l1_norm(M) -> float:
    """Sum of absolute values of all entries of ``M``."""
    return float(np.sum(np.abs(as_matrix(M))))


def orthonormality_error(W) -> float:
    W = np.asarray(W, dtype=np.float64)
    return float(np.max(np.abs(W.T @ W - np.eye(W.shape[1]))))


def sign_canonical(W):
    """Flip columns so each column's largest-magnitude entry is positive.

    Magnitudes within ``SIGN_TIE_RTOL`` of the column maximum count as ties;
    the lowest such index decides.
    """
    W = np.array(W, dtype=np.float64, copy=True)
    if W.ndim == 1:
        return sign_canonical(W[:, None])[:, 0]
    mags = np.abs(W)
    peak = mags.max(axis=0)
    for j in range(W.shape[1]):
        if peak[j] == 0.0:
            continue
        i = int(np.argmax(mags[:, j] >= peak[j] * (1.0 - SIGN_TIE_RTOL)))
        if W[i, j] < 0.0:
            W[:, j] = -W[:, j]
    return W


@dataclass(frozen=True, eq=False)
class Basis:
    """Orthonormal, sign-canonical projection matrix ``W`` (ambient_dim x k).

    ``mean`` is the centering offset of the data the basis was fitted on
    (a vector for 1-D methods, an r x n' matrix for 2-D ones), or None.
    """

    W: np.ndarray
    mean: Optional[np.ndarray] = None

    def __post_init__(self):
        W = as_matrix(self.W, "basis")
        d, k = W.shape
        if k > d:
            raise DimensionMismatch(f"basis has k={k} columns in dimension {d}")
        err = orthonormality_error(W)
        if err >= ORTHONORMAL_TOL:
            raise NotOrthonormal(f"||W^T W - I||_max = {err:.3e}")
        W = sign_canonical(W)
        W.setflags(write=False)
        object.__setattr__(self, "W", W)
        if self.mean is not None:
            mean = np.array(self.mean, dtype=np.float64, copy=True)
            mean.setflags(write=False)
            object.__setattr__(self, "mean", mean)

    @property
    def ambient_dim(self) -> int:
        return self.W.shape[0]

    @property
    def k(self) -> int:
        return self.W.shape[1]

    def column(self, j: int) -> np.ndarray:
        return self.W[:, j]

    def with_mean(self, mean) -> "Basis":
        return Basis(self.W, mean)

    def __repr__(self):
        return f"Basis(ambient_dim={self.ambient_dim}, k={self.k})"


@dataclass(frozen=True)
class EigenPairs:
    values: np.ndarray  # descending
    vectors: np.ndarray  # columns match values


def _as_array(B):
    return B.W if isinstance(B, Basis) else as_matrix(B)


def orthonormalize(W) -> Basis:
    """Gram-Schmidt (two passes per column) QR-style orthonormalization.

    Columns are processed left to right, so ``span(Q[:, :j]) == span(W[:, :j])``
    for every j.
    """
    W = _as_array(W)
    d, k = W.shape
    if k > d:
        raise RankDeficient(f"{k} columns cannot be independent in dimension {d}")
    if orthonormality_error(W) <= ORTHONORMAL_EXACT_TOL:
        return Basis(W)
    scale = float(np.linalg.norm(W))
    Q = np.zeros((d, k))
    for j in range(k):
        v = W[:, j].copy()
        for _ in range(2):
            if j:
                v -= Q[:, :j] @ (Q[:, :j].T @ v)
        nv = float(np.linalg.norm(v))
        if nv < RANK_TOL * scale or nv == 0.0:
            raise RankDeficient(f"column {j} is (numerically) dependent on the previous ones")
        Q[:, j] = v / nv
    return Basis(Q)


def symmetric_eig(A, k: Optional[int] = None) -> EigenPairs:
    """Top-k eigenpairs of a symmetric matrix by cyclic Jacobi sweeps."""
    A = as_matrix(A)
    n = A.shape[0]
    if A.shape[1] != n:
        raise NotSymmetric(f"matrix is not square: {A.shape}")
    if k is None:
        k = n
    if not 1 <= k <= n:
        raise DimensionMismatch(f"k={k} outside [1, {n}]")
    amax = float(np.max(np.abs(A)))
    if float(np.max(np.abs(A - A.T))) > SYMMETRY_TOL * max(amax, np.finfo(float).tiny):
        raise NotSymmetric("matrix is not symmetric within tolerance")
    A = 0.5 * (A + A.T)
    normF = float(np.linalg.norm(A))
    if normF == 0.0:
        return EigenPairs(np.zeros(k), np.eye(n)[:, :k])
    diag, V, _, off = kernels.jacobi_eigh(A, EIG_OFF_TOL * normF, EIG_MAX_SWEEPS)
    if off >= EIG_OFF_TOL * normF:
        raise NoConvergence(f"Jacobi off-diagonal norm {off:.3e} after {EIG_MAX_SWEEPS} sweeps")
    order = np.argsort(-diag, kind="stable")[:k]
    return EigenPairs(diag[order].copy(), sign_canonical(V[:, order]))


def median(values: Sequence[float]) -> float:
    """Median; even-length input gives the mean of the two middle values."""
    arr = np.asarray(values, dtype=np.float64).ravel()
    if arr.size == 0:
        raise EmptyInput("median of an empty sequence")
    if not np.all(np.isfinite(arr)):
        raise ValueError("median input contains NaN or Inf")
    return float(np.median(arr))


def subspace_angle(A: Union[Basis, np.ndarray], B: Union[Basis, np.ndarray]) -> float:
    """Largest principal angle (radians) between two equal-dimension spans.

    Small angles come from the sine (norm of the part of B outside span A),
    large ones from the cosine, which keeps both ends accurate.
    """
    Wa, Wb = _as_array(A), _as_array(B)
    if Wa.shape != Wb.shape:
        raise DimensionMismatch(f"bases have shapes {Wa.shape} and {Wb.shape}")
    M = Wa.T @ Wb
    R = Wb - Wa @ M
    sin2 = float(symmetric_eig(R.T @ R, 1).values[0])
    if sin2 <= 0.5:
        return float(np.arcsin(np.sqrt(min(max(sin2, 0.0), 1.0))))
    cos2 = float(symmetric_eig(M.T @ M).values[-1])
    return float(np.arccos(np.sqrt(min(max(cos2, 0.0), 1.0))))

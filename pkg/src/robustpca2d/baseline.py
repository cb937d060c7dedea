"""Standard PCA and left-sided 2DPCA.

Both serve as baselines and as initializers for the R1 iterations.
"""
import numpy as np

from .datasets import ImageDataset, VectorDataset, center
from .errors import DimensionMismatch, RankTooLow
from .linalg import Basis, EigenPairs, orthonormalize, sign_canonical, symmetric_eig

RANK_RTOL = 1e-12


def _centered(ds):
    return ds if ds.centered else center(ds)


def _check_rank(values, k, trace):
    if trace <= 0.0 or int(np.sum(values > RANK_RTOL * trace)) < k:
        raise RankTooLow(f"fewer than {k} eigenvalues above {RANK_RTOL:g} * trace")


def pca_eigenpairs(X: VectorDataset, k: int) -> EigenPairs:
    """Top-k eigenpairs of the sample covariance (1/n) sum x_i x_i^T.

    When d > n the n x n Gram matrix is diagonalized instead and its
    eigenvectors mapped back through the data; the nonzero spectrum is the same.
    """
    D = _centered(X).data
    d, n = D.shape
    if not 1 <= k <= min(d, n):
        raise DimensionMismatch(f"k={k} must lie in [1, min(d, n)={min(d, n)}]")
    if d <= n:
        ep = symmetric_eig(D @ D.T / n)
        _check_rank(ep.values, k, float(np.trace(D @ D.T)) / n)
        return EigenPairs(ep.values[:k], ep.vectors[:, :k])
    G = D.T @ D / n
    ep = symmetric_eig(G)
    _check_rank(ep.values, k, float(np.trace(G)))
    vals = ep.values[:k]
    W = D @ ep.vectors[:, :k] / np.sqrt(n * vals)
    return EigenPairs(vals, orthonormalize(W).W)


def fit_pca(X: VectorDataset, k: int) -> Basis:
    Xc = _centered(X)
    return Basis(pca_eigenpairs(Xc, k).vectors, mean=Xc.mean)


def covariance_2d(F: ImageDataset) -> np.ndarray:
    """Image covariance (1/n) sum F_i F_i^T  (r x r)."""
    A = F.images.transpose(1, 0, 2).reshape(F.r, -1)
    return A @ A.T / F.n


def pca2d_eigenpairs(F: ImageDataset, k: int) -> EigenPairs:
    Fc = _centered(F)
    if not 1 <= k <= Fc.r:
        raise DimensionMismatch(f"k={k} must lie in [1, r={Fc.r}]")
    C = covariance_2d(Fc)
    ep = symmetric_eig(C)
    _check_rank(ep.values, k, float(np.trace(C)))
    return EigenPairs(ep.values[:k], sign_canonical(ep.vectors[:, :k]))


def fit_2dpca(F: ImageDataset, k: int) -> Basis:
    """Left projection basis: features are W^T F_i (k x n')."""
    Fc = _centered(F)
    return Basis(pca2d_eigenpairs(Fc, k).vectors, mean=Fc.mean)

"""R1-PCA and 2DR1-PCA: Cauchy-reweighted subspace iteration.

Each iteration computes residues of the samples against the current basis,
turns them into Cauchy weights, multiplies the basis by the weighted
covariance and orthonormalizes. The weighted covariance is never formed
in the fit loop; ``C_r W`` is evaluated as ``X diag(w) (X^T W)``.
"""
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .baseline import fit_2dpca, fit_pca
from .datasets import ImageDataset, VectorDataset, center
from .errors import DimensionMismatch
from .linalg import Basis, orthonormalize, median, sign_canonical
from .report import FitReport

SCALE_RFLOOR = 1e-12
SCALE_AFLOOR = 1e-300
# Below this fraction of ||x||^2 the subtraction-based residue loses digits
# and the residue is recomputed from the explicit projection.
CANCELLATION_RTOL = 1e-8
# Residues below this fraction of ||x|| are rounding noise and become exact zeros.
RESIDUE_ZERO_RTOL = 1e-12


@dataclass(frozen=True)
class R1Options:
    max_iters: int = 120
    tol: float = 1e-6
    freeze_weights: bool = False
    force_uniform_weights: bool = False  # test hook: every weight = 1
    weight: str = "cauchy"  # or "l1": w_i = 1 / s_i
    init: Optional[object] = None  # Basis or array; default is PCA / 2DPCA
    record_iterates: bool = False


@dataclass(frozen=True, eq=False)
class CauchyWeights:
    weights: np.ndarray
    scale: float


def _data(X):
    return X.data if isinstance(X, VectorDataset) else np.asarray(X, dtype=np.float64)


def _images(F):
    return F.images if isinstance(F, ImageDataset) else np.asarray(F, dtype=np.float64)


def _W(W):
    return W.W if isinstance(W, Basis) else np.asarray(W, dtype=np.float64)


def _finish_residues(sq, proj, explicit):
    rad = sq - proj
    risky = rad <= CANCELLATION_RTOL * sq
    if np.any(risky):
        rad[risky] = explicit(risky)
    rad[rad <= RESIDUE_ZERO_RTOL ** 2 * sq] = 0.0
    return np.sqrt(rad)


def _residues_from_proj_1d(D, W, P):
    sq = np.sum(D * D, axis=0)
    proj = np.sum(P * P, axis=0)

    def explicit(mask):
        R = D[:, mask] - W @ P[:, mask]
        return np.sum(R * R, axis=0)

    return _finish_residues(sq, proj, explicit)


def _residues_from_proj_2d(F, W, P):
    sq = np.sum(F * F, axis=(1, 2))
    proj = np.sum(P * P, axis=(1, 2))

    def explicit(mask):
        R = F[mask] - np.einsum("rk,ikc->irc", W, P[mask])
        return np.sum(R * R, axis=(1, 2))

    return _finish_residues(sq, proj, explicit)


def residues_1d(X, W) -> np.ndarray:
    """s_i = sqrt(x_i^T x_i - x_i^T W W^T x_i) for every column of X."""
    D, Wm = _data(X), _W(W)
    if D.shape[0] != Wm.shape[0]:
        raise DimensionMismatch(f"data dimension {D.shape[0]} vs basis dimension {Wm.shape[0]}")
    return _residues_from_proj_1d(D, Wm, Wm.T @ D)


def residues_2d(F, W) -> np.ndarray:
    """s_i = ||F_i - W W^T F_i||_F for every image."""
    imgs, Wm = _images(F), _W(W)
    if imgs.shape[1] != Wm.shape[0]:
        raise DimensionMismatch(f"image rows {imgs.shape[1]} vs basis dimension {Wm.shape[0]}")
    return _residues_from_proj_2d(imgs, Wm, np.einsum("rk,irc->ikc", Wm, imgs))


def _weight_scale(s):
    return max(median(s), SCALE_RFLOOR * float(np.max(s)), SCALE_AFLOOR)


def cauchy_weights(residues) -> CauchyWeights:
    """w_i = (1 + s_i^2 / c^2)^-1 with c the (floored) median residue."""
    s = np.asarray(residues, dtype=np.float64).ravel()
    if s.size == 0:
        raise ValueError("no residues")
    if np.any(s < 0):
        raise ValueError("residues must be non-negative")
    c = _weight_scale(s)
    return CauchyWeights(1.0 / (1.0 + (s / c) ** 2), c)


def l1_weights(residues) -> CauchyWeights:
    """Alternative w_i = 1 / s_i, floored like the Cauchy scale. Not bounded by 1."""
    s = np.asarray(residues, dtype=np.float64).ravel()
    floor = _weight_scale(s) * SCALE_RFLOOR
    return CauchyWeights(1.0 / np.maximum(s, floor), floor)


def _weights_array(w, n):
    arr = np.asarray(w.weights if isinstance(w, CauchyWeights) else w, dtype=np.float64).ravel()
    if arr.size != n:
        raise DimensionMismatch(f"{arr.size} weights for {n} samples")
    return arr


def weighted_covariance_1d(X, w) -> np.ndarray:
    """C_r = sum_i w_i x_i x_i^T  (d x d)."""
    D = _data(X)
    om = _weights_array(w, D.shape[1])
    C = (D * om) @ D.T
    return 0.5 * (C + C.T)


def weighted_covariance_2d(F, w) -> np.ndarray:
    """C_r = sum_i w_i F_i F_i^T  (r x r)."""
    imgs = _images(F)
    n, r, _ = imgs.shape
    om = _weights_array(w, n)
    A = (imgs * om[:, None, None]).transpose(1, 0, 2).reshape(r, -1)
    B = imgs.transpose(1, 0, 2).reshape(r, -1)
    C = A @ B.T
    return 0.5 * (C + C.T)


class _Vec:
    def __init__(self, D):
        self.D = D

    def project(self, W):
        return W.T @ self.D

    def residues(self, W, P):
        return _residues_from_proj_1d(self.D, W, P)

    def update(self, P, om):
        return self.D @ (P * om).T


class _Img:
    # images laid side by side as an r x (n c) matrix so every product is one GEMM
    def __init__(self, F):
        self.n, self.r, self.c = F.shape
        self.F = F
        self.B = np.ascontiguousarray(F.transpose(1, 0, 2).reshape(self.r, -1))
        self.sq = np.sum(F * F, axis=(1, 2))

    def project(self, W):
        return W.T @ self.B  # (k, n c)

    def residues(self, W, P):
        proj = np.sum((P * P).reshape(P.shape[0], self.n, self.c), axis=(0, 2))

        def explicit(mask):
            Pm = P.reshape(-1, self.n, self.c)[:, mask]
            R = self.F[mask] - np.einsum("rk,kic->irc", W, Pm)
            return np.sum(R * R, axis=(1, 2))

        return _finish_residues(self.sq, proj, explicit)

    def update(self, P, om):
        return self.B @ (P * np.repeat(om, self.c)).T


def _iterate(model, W, opts: R1Options, method: str) -> Tuple[np.ndarray, FitReport]:
    if opts.weight not in ("cauchy", "l1"):
        raise ValueError(f"unknown weight function {opts.weight!r}")
    weigh = cauchy_weights if opts.weight == "cauchy" else l1_weights
    report = FitReport(method)
    P = model.project(W)
    res = model.residues(W, P)
    report.initial_objective = float(res.sum())
    if opts.record_iterates:
        report.iterates.append(W.copy())
    om = None
    for _ in range(opts.max_iters):
        if om is None or not opts.freeze_weights:
            om = np.ones_like(res) if opts.force_uniform_weights else weigh(res).weights
        U = model.update(P, om)
        Wn = orthonormalize(U).W
        change = float(np.linalg.norm(Wn - W))
        W = Wn
        P = model.project(W)
        res = model.residues(W, P)
        report.iterations += 1
        report.update_norms.append(float(np.linalg.norm(U)))
        report.change_norms.append(change)
        report.objective_trace.append(float(res.sum()))
        report.weight_min.append(float(om.min()))
        report.weight_max.append(float(om.max()))
        if opts.record_iterates:
            report.iterates.append(W.copy())
        if change < opts.tol:
            report.converged = True
            break
    return W, report


def _initial(opts, default_fn, dim, k):
    if opts.init is None:
        return default_fn().W
    W0 = sign_canonical(orthonormalize(opts.init).W)
    if W0.shape != (dim, k):
        raise DimensionMismatch(f"init basis has shape {W0.shape}, expected {(dim, k)}")
    return W0


def fit_r1_pca(X: VectorDataset, k: int, opts: Optional[R1Options] = None) -> Tuple[Basis, FitReport]:
    """R1-PCA on vector samples, started from the PCA basis."""
    opts = opts or R1Options()
    Xc = X if X.centered else center(X)
    d, n = Xc.data.shape
    if not 1 <= k <= min(d, n):
        raise DimensionMismatch(f"k={k} must lie in [1, min(d, n)={min(d, n)}]")
    W0 = _initial(opts, lambda: fit_pca(Xc, k), d, k)
    W, report = _iterate(_Vec(Xc.data), W0, opts, "r1pca")
    return Basis(W, mean=Xc.mean), report


def fit_2dr1_pca(F: ImageDataset, k: int, opts: Optional[R1Options] = None) -> Tuple[Basis, FitReport]:
    """2DR1-PCA on an image stack, started from the 2DPCA basis."""
    opts = opts or R1Options()
    Fc = F if F.centered else center(F)
    if not 1 <= k <= Fc.r:
        raise DimensionMismatch(f"k={k} must lie in [1, r={Fc.r}]")
    W0 = _initial(opts, lambda: fit_2dpca(Fc, k), Fc.r, k)
    W, report = _iterate(_Img(Fc.images), W0, opts, "2dr1pca")
    return Basis(W, mean=Fc.mean), report

"""Projection through a fitted basis and 1-NN face recognition."""
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .datasets import ImageDataset, VectorDataset
from .errors import DimensionMismatch, EmptyInput, EmptyTrainSet, LengthMismatch, MeanMismatch
from .linalg import Basis


@dataclass(frozen=True, eq=False)
class FeatureSet:
    """Per-sample features: (n, k) for vector methods, (n, k, n') for image methods."""

    features: np.ndarray
    labels: tuple

    def __post_init__(self):
        if len(self.labels) != self.features.shape[0]:
            raise LengthMismatch(f"{len(self.labels)} labels for {self.features.shape[0]} feature rows")

    @property
    def n(self) -> int:
        return self.features.shape[0]


def _relative(samples, values, mean, shape):
    """Sample values expressed relative to the basis' fitting mean."""
    if samples.centered:
        if mean is not None and (samples.mean is None or not np.array_equal(samples.mean, mean)):
            raise MeanMismatch("samples were centered with a different mean than the basis was fitted on")
        return values
    if mean is None:
        return values
    if mean.shape != shape:
        raise DimensionMismatch(f"basis mean has shape {mean.shape}, samples need {shape}")
    return values - (mean[:, None] if values.ndim == 2 else mean[None])


def project(W: Basis, samples) -> FeatureSet:
    """Features W^T x (vector samples) or W^T F_i (image samples).

    Uncentered samples are centered with the basis' stored mean; centered ones
    must carry that same mean.
    """
    if isinstance(samples, VectorDataset):
        if samples.d != W.ambient_dim:
            raise DimensionMismatch(f"samples have d={samples.d}, basis has {W.ambient_dim}")
        data = _relative(samples, samples.data, W.mean, (samples.d,))
        return FeatureSet((W.W.T @ data).T.copy(), samples.labels)
    if isinstance(samples, ImageDataset):
        if samples.r != W.ambient_dim:
            raise DimensionMismatch(f"images have r={samples.r}, basis has {W.ambient_dim}")
        imgs = _relative(samples, samples.images, W.mean, samples.shape)
        return FeatureSet(np.einsum("rk,irc->ikc", W.W, imgs), samples.labels)
    raise TypeError(f"cannot project {type(samples).__name__}")


def feature_distances(train: FeatureSet, x: np.ndarray, metric: str = "frobenius") -> np.ndarray:
    diff = train.features - x[None]
    if metric == "frobenius":
        return np.sqrt(np.sum(diff.reshape(train.n, -1) ** 2, axis=1))
    if metric == "column_sum":
        if diff.ndim != 3:
            raise DimensionMismatch("column_sum distance needs matrix features")
        return np.sum(np.sqrt(np.sum(diff * diff, axis=1)), axis=1)
    raise ValueError(f"unknown metric {metric!r}")


def nn_classify(train: FeatureSet, test: FeatureSet, metric: str = "frobenius") -> tuple:
    """Label of the nearest training sample for every test sample (ties: lowest index)."""
    if train.n == 0:
        raise EmptyTrainSet("no training samples")
    if train.features.shape[1:] != test.features.shape[1:]:
        raise DimensionMismatch(f"feature shapes {train.features.shape[1:]} vs {test.features.shape[1:]}")
    out = []
    for x in test.features:
        out.append(train.labels[int(np.argmin(feature_distances(train, x, metric)))])
    return tuple(out)


def accuracy(predicted: Sequence, actual: Sequence) -> float:
    if len(predicted) != len(actual):
        raise LengthMismatch(f"{len(predicted)} predictions for {len(actual)} labels")
    if len(actual) == 0:
        raise EmptyInput("no labels to score")
    return sum(p == a for p, a in zip(predicted, actual)) / len(actual)

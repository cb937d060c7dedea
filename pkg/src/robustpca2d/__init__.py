"""Robust subspace learning: R1-PCA, L1-PCA and their 2-D image variants."""
from ._backend import BACKEND
from .baseline import fit_2dpca, fit_pca
from .datasets import (
    ImageDataset,
    LabeledSplit,
    VectorDataset,
    center,
    load_pgm_directory,
    split_first_k,
    split_random_k,
    synth_line_with_outliers,
    uncenter,
    vectorize,
)
from .l1 import (
    brute_force_l1_oracle,
    fit_2dl1_pca,
    fit_l1_pca,
    l1_component_1d,
    l1_component_2d,
)
from .linalg import Basis, l1_norm, median, orthonormalize, r1_norm, subspace_angle, symmetric_eig
from .r1 import R1Options, cauchy_weights, fit_2dr1_pca, fit_r1_pca
from .recognition import FeatureSet, accuracy, nn_classify, project
from .report import FitReport

__version__ = "0.1.0"

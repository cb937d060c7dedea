import os
import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from robustpca2d.datasets import ImageDataset, VectorDataset

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def random_vectors(seed, d, n, spread=None):
    rng = np.random.default_rng(seed)
    D = rng.standard_normal((d, n))
    if spread is not None:
        D *= np.asarray(spread, dtype=float)[:, None]
    return VectorDataset(D, None)


def random_stack(seed, n, r, c):
    rng = np.random.default_rng(seed)
    return ImageDataset(rng.standard_normal((n, r, c)), tuple(range(n)))


def low_rank_stack(seed, n=30, r=12, c=8, rank=3, noise=0.05):
    """Images whose rows mostly live in a fixed rank-dimensional subspace of R^r."""
    rng = np.random.default_rng(seed)
    U, _ = np.linalg.qr(rng.standard_normal((r, rank)))
    coef = rng.standard_normal((n, rank, c)) * np.arange(rank, 0, -1)[None, :, None]
    imgs = np.einsum("rk,ikc->irc", U, coef) + noise * rng.standard_normal((n, r, c))
    return ImageDataset(imgs, tuple(i % 5 for i in range(n))), U


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def low_rank_vectors(seed, d=20, n=60, rank=3, noise=0.05):
    rng = np.random.default_rng(seed)
    U, _ = np.linalg.qr(rng.standard_normal((d, rank)))
    coef = rng.standard_normal((rank, n)) * np.arange(rank, 0, -1)[:, None]
    return VectorDataset(U @ coef + noise * rng.standard_normal((d, n)), None), U


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if mod is None or not mod.LINES:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(mod.LINES):
        terminalreporter.write_line(line)

"""Shared fixtures: reproducible random correlation models and datasets.

Random inputs are always built from an explicit integer seed so a failing
case can be replayed by hand. The correlation factory produces strictly
positive definite matrices (jittered Wishart-style base), keeping every
principal submatrix invertible and the Shapley machinery well defined.
"""

from __future__ import annotations

import numpy as np
import pytest

from shapley_r2.correlation import CorrelationModel
from shapley_r2.dataset import Dataset


def random_correlation(
    rng: np.random.Generator, p: int, jitter: float = 0.05
) -> np.ndarray:
    """A random well-conditioned p x p correlation matrix.

    The A'A base is positive semidefinite, the jitter bounds the smallest
    eigenvalue away from zero, and the diagonal rescale restores the unit
    diagonal.
    """
    a = rng.standard_normal((p + 2, p))
    cov = a.T @ a / (p + 2) + jitter * np.eye(p)
    scale = 1.0 / np.sqrt(np.diag(cov))
    corr = cov * np.outer(scale, scale)
    np.fill_diagonal(corr, 1.0)
    return corr


def random_dataset(rng: np.random.Generator, n: int, d: int) -> Dataset:
    """n rows of correlated Gaussian columns, response in column 0."""
    base = rng.standard_normal((n, d + 1))
    mix = 0.4 * rng.standard_normal((d + 1, d + 1)) + np.eye(d + 1)
    return Dataset(base @ mix)


def dataset_csv(seed: int = 1, n: int = 80, d: int = 3) -> str:
    """A well-behaved random dataset rendered as CSV text."""
    ds = random_dataset(np.random.default_rng(seed), n, d)
    header = ",".join(ds.column_names)
    body = "\n".join(",".join(repr(float(v)) for v in row) for row in ds.values)
    return f"{header}\n{body}\n"


@pytest.fixture
def make_model():
    def _make(seed: int, d: int, jitter: float = 0.05) -> CorrelationModel:
        rng = np.random.default_rng(seed)
        return CorrelationModel(random_correlation(rng, d + 1, jitter))

    return _make


@pytest.fixture
def make_dataset():
    def _make(seed: int, n: int, d: int) -> Dataset:
        return random_dataset(np.random.default_rng(seed), n, d)

    return _make


@pytest.fixture
def hand_dataset() -> Dataset:
    # Three points (1,2), (2,1), (3,3): deviations give sum(xy)=1 and
    # sum(x^2)=sum(y^2)=2, so the sample correlation is exactly 1/2.
    return Dataset(np.array([[1.0, 2.0], [2.0, 1.0], [3.0, 3.0]]), ("y", "x1"))

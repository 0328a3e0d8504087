"""Correlation-matrix kernel: construction, subset determinants, adjugates.

Everything downstream (R-squared values, the Shapley decomposition, the
delta-method covariances) is a function of principal submatrices of one
(d+1) x (d+1) correlation matrix, so this module owns the submatrix
determinant and scaled-adjugate caches keyed by variable-set bitmask.
"""

from __future__ import annotations

import warnings
from typing import Iterable

import numpy as np

from .dataset import Dataset
from .errors import (
    DimensionGuardError,
    DimensionWarning,
    EmptySetError,
    SingularSubmatrixError,
    ZeroVarianceError,
)
from .varsets import VariableSet

__all__ = [
    "CorrelationModel",
    "sample_correlation",
    "subset_determinant",
    "scaled_adjugate",
    "check_dimension",
    "SINGULARITY_TOL",
    "MAX_COVARIATES",
    "WARN_COVARIATES",
]

#: Determinants with smaller magnitude are treated as singular. The
#: threshold is this package's choice; it is surfaced in error messages.
SINGULARITY_TOL = 1e-12

#: Hard limit on d. Subset enumeration is Theta(2**d) and no
#: reformulation reduces that scaling.
MAX_COVARIATES = 20

#: Soft limit: warn that full inference will be slow beyond this.
WARN_COVARIATES = 12


def check_dimension(d: int) -> None:
    """Enforce the practical covariate-count limits."""
    if d > MAX_COVARIATES:
        raise DimensionGuardError(d, MAX_COVARIATES)
    if d > WARN_COVARIATES:
        warnings.warn(
            f"d={d} covariates: subset enumeration visits 2**{d} sets and "
            f"will be slow",
            DimensionWarning,
            stacklevel=3,
        )


class CorrelationModel:
    """A correlation matrix with memoized subset determinants/adjugates.

    The matrix itself is immutable; the caches fill lazily. Cache inserts
    are idempotent (same key always maps to the same value), so concurrent
    population from several threads is safe under CPython's atomic dict
    operations — duplicated work is possible, torn values are not.
    """

    def __init__(self, corr: np.ndarray, copy: bool = True):
        corr = np.array(corr, dtype=np.float64, copy=copy)
        if corr.ndim != 2 or corr.shape[0] != corr.shape[1]:
            raise ValueError(f"correlation matrix must be square, got {corr.shape}")
        if corr.shape[0] < 2:
            raise ValueError("correlation matrix needs at least 2 variables")
        if not np.allclose(corr, corr.T, rtol=0.0, atol=1e-12):
            raise ValueError("correlation matrix is not symmetric within 1e-12")
        if not np.allclose(np.diag(corr), 1.0, rtol=0.0, atol=1e-8):
            raise ValueError("correlation matrix diagonal must be 1")
        corr = 0.5 * (corr + corr.T)
        np.fill_diagonal(corr, 1.0)
        corr.setflags(write=False)
        self.corr = corr
        self._det_cache: dict[int, float] = {}
        self._adj_cache: dict[int, np.ndarray] = {}

    @property
    def n_variables(self) -> int:
        return self.corr.shape[0]

    @property
    def d(self) -> int:
        """Covariate count (variables minus the response)."""
        return self.corr.shape[0] - 1

    def submatrix(self, subset: VariableSet) -> np.ndarray:
        idx = np.fromiter(subset, dtype=np.intp)
        return self.corr[np.ix_(idx, idx)]

    def determinant(self, subset: VariableSet) -> float:
        """Determinant of the principal submatrix indexed by ``subset``.

        Memoized per bitmask. Singletons are exactly 1; orders 2 and 3
        use the cofactor formulas directly on matrix entries, which is
        both stable for correlation matrices (all entries in [-1, 1])
        and much cheaper than a LAPACK round trip at these sizes; larger
        orders go through LU factorization (``numpy.linalg.det``).
        """
        if subset.is_empty:
            raise EmptySetError("determinant of the empty variable set is undefined")
        cached = self._det_cache.get(subset.mask)
        if cached is not None:
            return cached
        size = subset.cardinality
        if size == 1:
            det = 1.0
        elif size == 2:
            i, j = subset.indices()
            det = 1.0 - self.corr[i, j] ** 2
        elif size == 3:
            i, j, k = subset.indices()
            a, b, c = self.corr[i, j], self.corr[i, k], self.corr[j, k]
            det = 1.0 - a * a - b * b - c * c + 2.0 * a * b * c
        else:
            det = float(np.linalg.det(self.submatrix(subset)))
        self._det_cache[subset.mask] = det
        return det

    def scaled_adjugate(self, subset: VariableSet) -> np.ndarray:
        """|R(U)| * inverse(R(U)), rows/columns in ascending index order.

        This is the gradient of the determinant with respect to the
        matrix, the building block of the determinant delta method.
        """
        if subset.is_empty:
            raise EmptySetError("adjugate of the empty variable set is undefined")
        cached = self._adj_cache.get(subset.mask)
        if cached is not None:
            return cached
        det = self.determinant(subset)
        if abs(det) < SINGULARITY_TOL:
            raise SingularSubmatrixError(subset.indices(), det)
        if subset.cardinality == 1:
            adj = np.array([[1.0]])
        else:
            adj = det * np.linalg.inv(self.submatrix(subset))
        adj.setflags(write=False)
        self._adj_cache[subset.mask] = adj
        return adj


def sample_correlation(data: Dataset) -> CorrelationModel:
    """Pearson correlation matrix of all d+1 columns of ``data``.

    Off-diagonal entries are clipped into [-1, 1] so that exactly
    collinear columns give exactly +/-1; the diagonal is exactly 1.
    """
    values = data.values
    centered = values - values.mean(axis=0)
    cross = centered.T @ centered
    norms = np.sqrt(np.diag(cross))
    zero = np.flatnonzero(norms == 0.0)
    if zero.size:
        raise ZeroVarianceError(data.column_names[int(zero[0])])
    corr = cross / np.outer(norms, norms)
    corr = 0.5 * (corr + corr.T)
    np.clip(corr, -1.0, 1.0, out=corr)
    np.fill_diagonal(corr, 1.0)
    return CorrelationModel(corr, copy=False)


def _as_set(subset: VariableSet | Iterable[int]) -> VariableSet:
    if isinstance(subset, VariableSet):
        return subset
    return VariableSet.from_indices(subset)


def subset_determinant(model: CorrelationModel, subset: VariableSet | Iterable[int]) -> float:
    return model.determinant(_as_set(subset))


def scaled_adjugate(model: CorrelationModel, subset: VariableSet | Iterable[int]) -> np.ndarray:
    return model.scaled_adjugate(_as_set(subset))

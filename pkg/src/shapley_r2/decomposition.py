"""R-squared over variable subsets and its Shapley decomposition.

The per-subset coefficient of determination is a ratio of correlation
determinants; the Shapley value of covariate j averages j's marginal
R-squared contribution over all orderings. Two equivalent forms are
provided: the subset-weight form used everywhere in production, and the
permutation form kept as a brute-force cross-check for small d.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable

import numpy as np

from .correlation import SINGULARITY_TOL, CorrelationModel, check_dimension
from .errors import DimensionGuardError, NotPositiveDefiniteError, SingularSubmatrixError
from .varsets import VariableSet, iter_submasks

__all__ = [
    "ShapleyVector",
    "r_squared_subset",
    "shapley_subset_form",
    "shapley_permutation_form",
    "population_shapley",
    "subset_weights",
    "correlation_from_covariance",
]

#: The permutation form enumerates d! orderings; past this it is a
#: worse oracle than the subset form it exists to check.
MAX_PERMUTATION_D = 8


@dataclass(frozen=True)
class ShapleyVector:
    """Shapley values of the d covariates plus the total R-squared.

    ``values[j-1]`` is the attribution of covariate j; their sum equals
    ``r_squared`` up to floating-point roundoff (efficiency).
    """

    values: np.ndarray
    r_squared: float
    source: str = "sample"

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.float64)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def d(self) -> int:
        return self.values.shape[0]


@lru_cache(maxsize=None)
def subset_weights(d: int) -> tuple[float, ...]:
    """Shapley weight for a coalition of size s among d covariates.

    ``weights[s] = s! (d-s-1)! / d!`` computed in exact rational
    arithmetic and rounded to float once per (s, d); the weights over all
    subsets excluding one covariate sum to exactly 1.
    """
    if d < 1:
        raise ValueError(f"d must be >= 1, got {d}")
    fact = [math.factorial(m) for m in range(d + 1)]
    return tuple(
        float(Fraction(fact[s] * fact[d - s - 1], fact[d])) for s in range(d)
    )


def r_squared_subset(model: CorrelationModel, subset: VariableSet | Iterable[int]) -> float:
    """Coefficient of determination of the response on the given covariates.

    Computed as 1 - det(C({0} u S)) / det(C(S)); the empty set yields
    exactly 0 by convention.
    """
    if not isinstance(subset, VariableSet):
        subset = VariableSet.from_indices(subset)
    if subset.contains_response():
        raise ValueError("subset must contain covariate indices only, not 0")
    if subset.is_empty:
        return 0.0
    denom = model.determinant(subset)
    if abs(denom) < SINGULARITY_TOL:
        raise SingularSubmatrixError(subset.indices(), denom)
    numer = model.determinant(subset.with_response())
    return 1.0 - numer / denom


def shapley_subset_form(model: CorrelationModel, source: str = "sample") -> ShapleyVector:
    """Shapley decomposition via the subset-weight form.

    For each covariate j, sums w(|S|) * [R2(S u {j}) - R2(S)] over the
    2**(d-1) subsets S of the remaining covariates, in ascending bitmask
    order with pairwise (tree) summation of the collected terms.
    """
    d = model.d
    check_dimension(d)
    weights = subset_weights(d)
    values = np.empty(d)
    for j in range(1, d + 1):
        others = tuple(i for i in range(1, d + 1) if i != j)
        jbit = 1 << j
        terms = np.empty(1 << (d - 1))
        for t, mask in enumerate(iter_submasks(others)):
            without = r_squared_subset(model, VariableSet(mask))
            with_j = r_squared_subset(model, VariableSet(mask | jbit))
            terms[t] = weights[mask.bit_count()] * (with_j - without)
        values[j - 1] = np.sum(terms)
    total = r_squared_subset(model, VariableSet.full(d, include_response=False))
    return ShapleyVector(values, total, source)


def shapley_permutation_form(model: CorrelationModel, source: str = "sample") -> ShapleyVector:
    """Shapley decomposition by direct enumeration of all d! orderings.

    Exists as an independent oracle for the subset form; limited to
    d <= 8.
    """
    d = model.d
    if d > MAX_PERMUTATION_D:
        raise DimensionGuardError(
            d,
            MAX_PERMUTATION_D,
            "the permutation form enumerates d! orderings and exists only "
            "as a small-d cross-check",
        )
    marginals: list[list[float]] = [[] for _ in range(d)]
    for perm in itertools.permutations(range(1, d + 1)):
        mask = 0
        previous = 0.0
        for j in perm:
            mask |= 1 << j
            current = r_squared_subset(model, VariableSet(mask))
            marginals[j - 1].append(current - previous)
            previous = current
    n_perms = math.factorial(d)
    values = np.array([np.sum(np.asarray(m)) / n_perms for m in marginals])
    total = r_squared_subset(model, VariableSet.full(d, include_response=False))
    return ShapleyVector(values, total, source)


def correlation_from_covariance(cov: np.ndarray) -> CorrelationModel:
    """Correlation model induced by a symmetric positive definite covariance."""
    cov = np.asarray(cov, dtype=np.float64)
    if cov.ndim != 2 or cov.shape[0] != cov.shape[1]:
        raise NotPositiveDefiniteError(f"covariance must be square, got {cov.shape}")
    if not np.allclose(cov, cov.T, rtol=0.0, atol=1e-10 * max(1.0, float(np.abs(cov).max()))):
        raise NotPositiveDefiniteError("covariance matrix is not symmetric")
    try:
        np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        raise NotPositiveDefiniteError(
            "covariance matrix is not positive definite"
        ) from None
    scale = 1.0 / np.sqrt(np.diag(cov))
    corr = cov * np.outer(scale, scale)
    corr = 0.5 * (corr + corr.T)
    np.clip(corr, -1.0, 1.0, out=corr)
    np.fill_diagonal(corr, 1.0)
    return CorrelationModel(corr, copy=False)


def population_shapley(cov: np.ndarray) -> ShapleyVector:
    """Shapley decomposition at known population covariance.

    Only the induced correlation matrix matters: rescaling the covariance
    by any positive diagonal matrix leaves the result unchanged. Used for
    the coverage-study truth values.
    """
    model = correlation_from_covariance(cov)
    return shapley_subset_form(model, source="population")

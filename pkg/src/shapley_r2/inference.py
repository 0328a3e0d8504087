"""Delta-method asymptotics for the Shapley decomposition.

The chain runs: covariances of sample correlations (under an elliptical
data assumption, parameterized by the multivariate kurtosis), to
covariances of correlation-submatrix determinants, to covariances of
subset R-squared values, to the joint covariance of the Shapley values.
Confidence intervals and the two-value difference test plug in the
sample correlation matrix and the kurtosis estimate.

All covariance evaluations for one (correlation matrix, kurtosis) pair
go through a :class:`ShapleyAsymptotics` engine that memoizes the
determinant and R-squared covariance layers; the Shapley-level double
subset sums revisit those pairs heavily.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve
from scipy.special import ndtr, ndtri

from .correlation import (
    SINGULARITY_TOL,
    CorrelationModel,
    check_dimension,
    sample_correlation,
)
from .dataset import Dataset
from .decomposition import ShapleyVector, shapley_subset_form, subset_weights
from .errors import (
    DegenerateVarianceError,
    NegativeVarianceError,
    SingularCovarianceError,
)
from .varsets import VariableSet, iter_submasks

__all__ = [
    "KurtosisEstimate",
    "ShapleyCovariance",
    "ShapleyInference",
    "DifferenceTest",
    "ShapleyAsymptotics",
    "mardia_kurtosis",
    "acov_corr",
    "acov_det",
    "acov_r2",
    "shapley_acov",
    "confidence_intervals",
    "intervals_from_model",
    "difference_test",
    "difference_test_from",
]

#: Variance estimates below this (in absolute value) are treated as
#: exactly zero when they appear in denominators.
DEGENERACY_TOL = 1e-12

#: Estimated variances may dip this far below zero from roundoff before
#: we refuse to continue.
NEGATIVE_VARIANCE_TOL = 1e-10


@dataclass(frozen=True)
class KurtosisEstimate:
    """Mardia's multivariate kurtosis coefficient (1 for the normal)."""

    kappa: float
    n: int


@dataclass(frozen=True)
class ShapleyCovariance:
    """Joint asymptotic covariance of the normalized Shapley values.

    ``acov[j-1, k-1]`` is the asymptotic covariance between the
    root-n-scaled Shapley values of covariates j and k.
    """

    acov: np.ndarray
    kappa_used: float
    n: int | None = None

    def __post_init__(self) -> None:
        acov = np.asarray(self.acov, dtype=np.float64)
        acov.setflags(write=False)
        object.__setattr__(self, "acov", acov)

    @property
    def d(self) -> int:
        return self.acov.shape[0]

    def variance(self, j: int) -> float:
        """Asymptotic variance for covariate j (1-based)."""
        if not 1 <= j <= self.d:
            raise IndexError(f"covariate index must be in 1..{self.d}, got {j}")
        return float(self.acov[j - 1, j - 1])


@dataclass(frozen=True)
class ShapleyInference:
    """Shapley point estimates with their asymptotic confidence intervals."""

    shapley: ShapleyVector
    covariance: ShapleyCovariance
    intervals: np.ndarray
    alpha: float
    n: int

    def __post_init__(self) -> None:
        intervals = np.asarray(self.intervals, dtype=np.float64)
        intervals.setflags(write=False)
        object.__setattr__(self, "intervals", intervals)


@dataclass(frozen=True)
class DifferenceTest:
    """Two-sided z-test of equal Shapley attribution for covariates j, k.

    ``degenerate`` marks the exactly-exchangeable plug-in case where both
    the difference and its estimated variance vanish; the statistic is
    then reported as 0 with p-value 1 instead of NaN.
    """

    j: int
    k: int
    statistic: float
    p_value: float
    degenerate: bool
    shapley_j: float
    shapley_k: float
    avar_j: float
    avar_k: float
    acov_jk: float
    n: int


def mardia_kurtosis(data: Dataset) -> KurtosisEstimate:
    """Multivariate kurtosis estimate from squared Mahalanobis norms.

    Uses the divisor-n sample covariance inside the Mahalanobis form;
    the divisor-(n-1) variant differs by O(1/n) and is irrelevant at the
    tolerances used downstream.
    """
    n, p = data.values.shape
    if n <= p:
        raise SingularCovarianceError(
            f"kurtosis estimation needs n > d+1, got n={n}, d+1={p}"
        )
    centered = data.values - data.values.mean(axis=0)
    sigma = centered.T @ centered / n
    try:
        chol = cho_factor(sigma, lower=True)
    except np.linalg.LinAlgError:
        raise SingularCovarianceError(
            "sample covariance matrix is singular; check for collinear columns"
        ) from None
    solved = cho_solve(chol, centered.T)
    quad = np.einsum("ij,ji->i", centered, solved)
    kappa = float(np.sum(quad**2) / (n * p * (p + 2)))
    return KurtosisEstimate(kappa, n)


class ShapleyAsymptotics:
    """Covariance engine for one correlation matrix and kurtosis value.

    Methods are pure given the constructor arguments; the memo caches are
    idempotent-insert dictionaries and safe for concurrent population.
    """

    def __init__(self, model: CorrelationModel, kappa: float):
        if kappa <= 0:
            raise ValueError(f"kurtosis must be positive, got {kappa}")
        self.model = model
        self.kappa = kappa
        self._det_cov: dict[tuple[int, int], float] = {}
        self._r2_cov: dict[tuple[int, int], float] = {}

    def acov_corr(self, g: int, h: int, j: int, k: int) -> float:
        """Asymptotic covariance of the sample correlations (g,h) and (j,k).

        Diagonal correlations are constant, so any pair with g == h or
        j == k contributes exactly 0.
        """
        if g == h or j == k:
            return 0.0
        r = self.model.corr
        positive = (
            r[g, h] * r[j, k] * (r[g, j] ** 2 + r[h, j] ** 2 + r[g, k] ** 2 + r[h, k] ** 2) / 2.0
            + r[g, j] * r[h, k]
            + r[g, k] * r[h, j]
        )
        negative = (
            r[g, h] * (r[h, j] * r[h, k] + r[g, j] * r[g, k])
            + r[j, k] * (r[g, j] * r[h, j] + r[g, k] * r[h, k])
        )
        return self.kappa * (positive - negative)

    def _det_gradient(self, subset: VariableSet) -> np.ndarray:
        """Derivative of det(R(U)) for symmetric R: 2|R|R^-1 - |R|diag(R^-1)."""
        adj = self.model.scaled_adjugate(subset)
        return 2.0 * adj - np.diag(np.diag(adj))

    def acov_det(self, u: VariableSet, v: VariableSet) -> float:
        """Asymptotic covariance of the determinants of C(U) and C(V).

        Symmetric-gradient double sum over index pairs g <= h in U and
        j <= k in V; memoized with (U, V)/(V, U) folding. Singleton sets
        have constant determinant 1 and covariance exactly 0.
        """
        if u.cardinality <= 1 or v.cardinality <= 1:
            if u.is_empty or v.is_empty:
                raise ValueError("determinant covariance needs nonempty sets")
            return 0.0
        key = (u.mask, v.mask) if u.mask <= v.mask else (v.mask, u.mask)
        cached = self._det_cov.get(key)
        if cached is not None:
            return cached
        star_u = self._det_gradient(u)
        star_v = self._det_gradient(v)
        idx_u = u.indices()
        idx_v = v.indices()
        total = 0.0
        for a in range(len(idx_u)):
            for b in range(a + 1, len(idx_u)):
                w_u = star_u[a, b]
                if w_u == 0.0:
                    continue
                g, h = idx_u[a], idx_u[b]
                for c in range(len(idx_v)):
                    for e in range(c + 1, len(idx_v)):
                        total += w_u * star_v[c, e] * self.acov_corr(g, h, idx_v[c], idx_v[e])
        self._det_cov[key] = total
        return total

    def acov_r2(self, s: VariableSet, t: VariableSet) -> float:
        """Asymptotic covariance of the subset R-squared values for S and T.

        Four determinant-covariance terms from the quotient rule applied
        to 1 - det(C({0} u S))/det(C(S)); an empty subset has constant
        R-squared 0 and contributes covariance 0.
        """
        if s.contains_response() or t.contains_response():
            raise ValueError("R-squared subsets must not contain the response index 0")
        if s.is_empty or t.is_empty:
            return 0.0
        key = (s.mask, t.mask) if s.mask <= t.mask else (t.mask, s.mask)
        cached = self._r2_cov.get(key)
        if cached is not None:
            return cached
        s0 = s.with_response()
        t0 = t.with_response()
        det_s = self.model.determinant(s)
        det_t = self.model.determinant(t)
        det_s0 = self.model.determinant(s0)
        det_t0 = self.model.determinant(t0)
        value = (
            self.acov_det(s0, t0) / (det_s * det_t)
            + det_s0 * det_t0 / (det_s**2 * det_t**2) * self.acov_det(s, t)
            - det_s0 / (det_s**2 * det_t) * self.acov_det(s, t0)
            - det_t0 / (det_s * det_t**2) * self.acov_det(s0, t)
        )
        self._r2_cov[key] = value
        return value

    def shapley_covariance(self, n: int | None = None) -> ShapleyCovariance:
        """Joint asymptotic covariance matrix of the d Shapley values.

        Entry (j, k) combines the R-squared covariances of the marginal
        contributions over all subset pairs (S, T) with S avoiding j and
        T avoiding k, weighted by the Shapley coalition weights. The
        R-squared layer is memoized, so each distinct (S, T) pair is
        evaluated once. Diagonal entries within roundoff of zero are
        clamped to 0; materially negative ones raise.
        """
        d = self.model.d
        check_dimension(d)
        weights = subset_weights(d)
        acov = np.empty((d, d))
        for j in range(1, d + 1):
            others_j = tuple(i for i in range(1, d + 1) if i != j)
            jbit = 1 << j
            for k in range(j, d + 1):
                others_k = tuple(i for i in range(1, d + 1) if i != k)
                kbit = 1 << k
                terms = np.empty(1 << (2 * (d - 1)))
                pos = 0
                for s_mask in iter_submasks(others_j):
                    w_s = weights[s_mask.bit_count()]
                    s = VariableSet(s_mask)
                    s_j = VariableSet(s_mask | jbit)
                    for t_mask in iter_submasks(others_k):
                        t = VariableSet(t_mask)
                        t_k = VariableSet(t_mask | kbit)
                        combined = (
                            self.acov_r2(s_j, t_k)
                            + self.acov_r2(s, t)
                            - self.acov_r2(s, t_k)
                            - self.acov_r2(s_j, t)
                        )
                        terms[pos] = w_s * weights[t_mask.bit_count()] * combined
                        pos += 1
                acov[j - 1, k - 1] = acov[k - 1, j - 1] = np.sum(terms)
        _clamp_diagonal(acov)
        return ShapleyCovariance(acov, self.kappa, n)


def _clamp_diagonal(acov: np.ndarray) -> None:
    for i in range(acov.shape[0]):
        value = acov[i, i]
        if value < -NEGATIVE_VARIANCE_TOL:
            raise NegativeVarianceError(value, i + 1)
        if value < 0.0:
            warnings.warn(
                f"clamping tiny negative variance estimate {value:.3e} for "
                f"covariate {i + 1} to 0",
                RuntimeWarning,
                stacklevel=3,
            )
            acov[i, i] = 0.0


def acov_corr(model: CorrelationModel, kappa: float, g: int, h: int, j: int, k: int) -> float:
    return ShapleyAsymptotics(model, kappa).acov_corr(g, h, j, k)


def acov_det(model: CorrelationModel, kappa: float, u: VariableSet, v: VariableSet) -> float:
    return ShapleyAsymptotics(model, kappa).acov_det(u, v)


def acov_r2(model: CorrelationModel, kappa: float, s: VariableSet, t: VariableSet) -> float:
    return ShapleyAsymptotics(model, kappa).acov_r2(s, t)


def shapley_acov(model: CorrelationModel, kappa: float, n: int | None = None) -> ShapleyCovariance:
    return ShapleyAsymptotics(model, kappa).shapley_covariance(n)


def intervals_from_model(
    model: CorrelationModel,
    kappa: float,
    n: int,
    alpha: float,
    shapley: ShapleyVector | None = None,
) -> ShapleyInference:
    """Asymptotic confidence intervals given a correlation model and kurtosis.

    Exposed separately from :func:`confidence_intervals` so population
    matrices can be plugged in directly (no estimation step).
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    if shapley is None:
        shapley = shapley_subset_form(model)
    covariance = ShapleyAsymptotics(model, kappa).shapley_covariance(n)
    z = float(ndtri(1.0 - alpha / 2.0))
    half = z * np.sqrt(np.diag(covariance.acov) / n)
    intervals = np.column_stack([shapley.values - half, shapley.values + half])
    return ShapleyInference(shapley, covariance, intervals, alpha, n)


def confidence_intervals(data: Dataset, alpha: float = 0.05) -> ShapleyInference:
    """Shapley values of ``data`` with plug-in asymptotic confidence intervals."""
    model = sample_correlation(data)
    kurtosis = mardia_kurtosis(data)
    return intervals_from_model(model, kurtosis.kappa, data.n, alpha)


def difference_test(data: Dataset, j: int, k: int) -> DifferenceTest:
    """Test whether covariates j and k (1-based) share the same attribution."""
    d = data.d
    if not (1 <= j <= d and 1 <= k <= d):
        raise ValueError(f"covariate indices must be in 1..{d}, got j={j}, k={k}")
    if j == k:
        raise ValueError("difference test requires two distinct covariates")
    model = sample_correlation(data)
    kurtosis = mardia_kurtosis(data)
    shapley = shapley_subset_form(model)
    covariance = ShapleyAsymptotics(model, kurtosis.kappa).shapley_covariance(data.n)
    return difference_test_from(shapley, covariance, j, k, data.n)


def difference_test_from(
    shapley: ShapleyVector,
    covariance: ShapleyCovariance,
    j: int,
    k: int,
    n: int,
) -> DifferenceTest:
    """Difference test from precomputed Shapley values and covariance."""
    avar_j = covariance.variance(j)
    avar_k = covariance.variance(k)
    acov_jk = float(covariance.acov[j - 1, k - 1])
    diff = float(shapley.values[j - 1] - shapley.values[k - 1])
    var_diff = avar_j + avar_k - 2.0 * acov_jk
    denom = np.sqrt(max(var_diff, 0.0))
    numer = np.sqrt(n) * diff
    if denom < DEGENERACY_TOL:
        if abs(numer) < DEGENERACY_TOL:
            # Exactly exchangeable plug-in: report a null result, flagged.
            return DifferenceTest(
                j, k, 0.0, 1.0, True, float(shapley.values[j - 1]),
                float(shapley.values[k - 1]), avar_j, avar_k, acov_jk, n,
            )
        raise DegenerateVarianceError(
            f"estimated variance of the Shapley difference ({var_diff:.3e}) is "
            f"numerically zero while the difference is not; the plug-in "
            f"correlation matrix is likely exactly collinear"
        )
    statistic = float(numer / denom)
    p_value = float(2.0 * ndtr(-abs(statistic)))
    return DifferenceTest(
        j, k, statistic, p_value, False, float(shapley.values[j - 1]),
        float(shapley.values[k - 1]), avar_j, avar_k, acov_jk, n,
    )

"""Yeo-Johnson power transform with per-column maximum likelihood lambda.

Used as an optional preprocessing step to pull each column toward
normality before the correlation analysis. The transform is defined for
all reals:

    psi(x, lam) = ((x+1)^lam - 1) / lam            x >= 0, lam != 0
                  log(x+1)                          x >= 0, lam == 0
                  -((-x+1)^(2-lam) - 1) / (2-lam)   x < 0,  lam != 2
                  -log(-x+1)                        x < 0,  lam == 2

Lambda maximizes the normal profile log-likelihood over the grid
[-5, 5] in steps of 0.01, then a golden-section pass refines within the
bracketing grid interval.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import Dataset
from .errors import NonFiniteDataError

__all__ = ["TransformResult", "yeo_johnson_transform", "yeo_johnson", "transform_dataset"]

GRID_LO = -5.0
GRID_HI = 5.0
GRID_STEP = 0.01

#: Stop the golden-section pass when the bracket is this narrow.
REFINE_TOL = 1e-7

_INV_GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class TransformResult:
    values: np.ndarray
    lmbda: float

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.float64)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)


def yeo_johnson_transform(x: np.ndarray, lmbda: float) -> np.ndarray:
    """Apply the Yeo-Johnson transform with a fixed lambda."""
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    pos = x >= 0
    neg = ~pos
    # log1p / expm1 keep precision for x near 0 and lambda near the
    # removable singularities at 0 and 2.
    if abs(lmbda) < 1e-12:
        out[pos] = np.log1p(x[pos])
    else:
        out[pos] = np.expm1(lmbda * np.log1p(x[pos])) / lmbda
    if abs(lmbda - 2.0) < 1e-12:
        out[neg] = -np.log1p(-x[neg])
    else:
        out[neg] = -np.expm1((2.0 - lmbda) * np.log1p(-x[neg])) / (2.0 - lmbda)
    return out


def _profile_loglik(x: np.ndarray, jacobian_term: float, lmbda: float) -> float:
    """Normal profile log-likelihood of lambda, up to constants.

    -(n/2) log(sigma_hat^2(lambda)) + (lambda - 1) * sum sign(x) log(|x|+1),
    with the divisor-n variance of the transformed values.
    """
    with np.errstate(over="ignore"):
        t = yeo_johnson_transform(x, lmbda)
        var = float(np.var(t))
    if not np.isfinite(var) or var <= 0.0:
        return -np.inf
    n = x.size
    return -0.5 * n * np.log(var) + (lmbda - 1.0) * jacobian_term


def yeo_johnson(column: np.ndarray) -> TransformResult:
    """Transform one column with lambda chosen by maximum likelihood.

    Grid search over [-5, 5] step 0.01 picks the bracket; a golden-section
    pass inside the two neighboring grid points refines the maximizer.
    Constant columns keep lambda = 1 (the transform is then an irrelevant
    shift and the likelihood carries no information about lambda).
    """
    x = np.asarray(column, dtype=np.float64)
    if x.ndim != 1 or x.size == 0:
        raise ValueError("yeo_johnson expects a nonempty 1-D array")
    if not np.all(np.isfinite(x)):
        raise NonFiniteDataError("column contains non-finite values")
    if np.ptp(x) == 0.0:
        return TransformResult(yeo_johnson_transform(x, 1.0), 1.0)
    jacobian_term = float(np.sum(np.sign(x) * np.log1p(np.abs(x))))
    grid = np.arange(GRID_LO, GRID_HI + GRID_STEP / 2, GRID_STEP)
    scores = np.array([_profile_loglik(x, jacobian_term, lam) for lam in grid])
    best = int(np.argmax(scores))
    lo = grid[max(best - 1, 0)]
    hi = grid[min(best + 1, len(grid) - 1)]
    lmbda = _golden_section(lambda lam: _profile_loglik(x, jacobian_term, lam), lo, hi)
    return TransformResult(yeo_johnson_transform(x, lmbda), lmbda)


def _golden_section(f, lo: float, hi: float) -> float:
    """Maximize the unimodal ``f`` on [lo, hi] by golden-section search."""
    a, b = lo, hi
    c = b - _INV_GOLDEN * (b - a)
    d = a + _INV_GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while b - a > REFINE_TOL:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INV_GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_GOLDEN * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def transform_dataset(data: Dataset) -> tuple[Dataset, dict[str, float]]:
    """Apply the transform to every column of a dataset independently.

    Returns the transformed dataset and the chosen lambda per column,
    keyed by column name, so the preprocessing is fully reproducible.
    """
    transformed = np.empty_like(data.values)
    lambdas: dict[str, float] = {}
    for idx, name in enumerate(data.column_names):
        result = yeo_johnson(data.values[:, idx])
        transformed[:, idx] = result.values
        lambdas[name] = result.lmbda
    return Dataset(transformed, data.column_names), lambdas

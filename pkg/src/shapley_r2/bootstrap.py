"""Nonparametric bootstrap percentile intervals for Shapley values.

This is the baseline method the asymptotic intervals are compared
against. Each resample draws n rows with replacement, recomputes the
Shapley decomposition, and the per-covariate interval is the middle
1 - alpha percentile range of the resampled values.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .correlation import check_dimension, sample_correlation
from .dataset import Dataset
from .decomposition import shapley_subset_form
from .errors import (
    DegenerateResampleError,
    SingularSubmatrixError,
    ZeroVarianceError,
)

__all__ = ["BootstrapConfig", "BootstrapResult", "bootstrap_ci", "percentile_interval"]

#: Fraction of degenerate draws (zero-variance column or singular
#: correlation matrix) tolerated before the whole run is abandoned.
MAX_DEGENERATE_FRACTION = 0.1


@dataclass(frozen=True)
class BootstrapConfig:
    n_resamples: int
    alpha: float = 0.05
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_resamples < 1:
            raise ValueError(f"n_resamples must be positive, got {self.n_resamples}")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must be in (0, 1), got {self.alpha}")
        if self.n_resamples < 2.0 / self.alpha:
            raise ValueError(
                f"n_resamples={self.n_resamples} is too small to estimate the "
                f"alpha/2={self.alpha / 2} percentile; need at least "
                f"{int(np.ceil(2.0 / self.alpha))}"
            )
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")


@dataclass(frozen=True)
class BootstrapResult:
    """Percentile intervals plus the resampled Shapley draws behind them.

    ``intervals[j-1]`` is the (lower, upper) pair for covariate j;
    ``samples`` has one row per resample in resample-index order.
    """

    intervals: np.ndarray
    samples: np.ndarray
    n_degenerate: int
    config: BootstrapConfig

    def __post_init__(self) -> None:
        for name in ("intervals", "samples"):
            arr = np.asarray(getattr(self, name), dtype=np.float64)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def d(self) -> int:
        return self.intervals.shape[0]

    def widths(self) -> np.ndarray:
        return self.intervals[:, 1] - self.intervals[:, 0]


def percentile_interval(values: np.ndarray, alpha: float) -> tuple[float, float]:
    """Middle 1 - alpha range of ``values`` under the type-7 percentile rule.

    Type 7 interpolates linearly between order statistics at position
    1 + (N - 1) p (1-based); this matches numpy's default.
    """
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 1 or values.size == 0:
        raise ValueError("percentile_interval expects a nonempty 1-D array")
    lo, hi = np.percentile(values, [100.0 * alpha / 2.0, 100.0 * (1.0 - alpha / 2.0)])
    return float(lo), float(hi)


def bootstrap_ci(data: Dataset, cfg: BootstrapConfig) -> BootstrapResult:
    """Bootstrap percentile confidence intervals for all d Shapley values.

    Resample r is generated from a stream derived from (seed, r, attempt),
    so results do not depend on evaluation order and are reproducible
    under any parallel schedule. Degenerate resamples are redrawn with
    the attempt counter bumped; more than 10 percent degenerate draws in
    total aborts the run.
    """
    check_dimension(data.d)
    n = data.n
    n_resamples = cfg.n_resamples
    samples = np.empty((n_resamples, data.d))
    n_degenerate = 0
    max_degenerate = MAX_DEGENERATE_FRACTION * n_resamples
    for r in range(n_resamples):
        for attempt in itertools.count():
            rng = np.random.default_rng(np.random.SeedSequence((cfg.seed, r, attempt)))
            rows = rng.integers(0, n, size=n)
            try:
                resample = Dataset(data.values[rows], data.column_names)
                samples[r] = shapley_subset_form(sample_correlation(resample)).values
                break
            except (ZeroVarianceError, SingularSubmatrixError):
                n_degenerate += 1
                if n_degenerate > max_degenerate:
                    raise DegenerateResampleError(
                        f"{n_degenerate} of the bootstrap draws so far were "
                        f"degenerate (limit {MAX_DEGENERATE_FRACTION:.0%} of "
                        f"{n_resamples}); the dataset is too close to "
                        f"constant or collinear to resample"
                    ) from None
    lo, hi = np.percentile(
        samples, [100.0 * cfg.alpha / 2.0, 100.0 * (1.0 - cfg.alpha / 2.0)], axis=0
    )
    intervals = np.column_stack([lo, hi])
    return BootstrapResult(intervals, samples, n_degenerate, cfg)

"""Exception hierarchy shared by every layer of the package.

Two broad families matter for the CLI exit-code contract: ``DataError``
(bad or unusable input, exit code 2) and ``NumericalError`` (the input
parsed but the computation cannot proceed, exit code 3).
"""

from __future__ import annotations


class ShapleyR2Error(Exception):
    """Base class for all package exceptions."""


class DataError(ShapleyR2Error):
    """Input data is malformed, degenerate, or outside supported limits."""

    exit_code = 2


class NumericalError(ShapleyR2Error):
    """Computation failed for numerical reasons (singularity, degeneracy)."""

    exit_code = 3


class ZeroVarianceError(DataError):
    """A column has zero sample variance; correlations are undefined."""

    def __init__(self, column: int | str):
        self.column = column
        super().__init__(f"column {column!r} has zero sample variance")


class NonFiniteDataError(DataError):
    """Input contains NaN or infinite entries."""


class ParseError(DataError):
    """CSV input could not be parsed into a numeric dataset."""

    def __init__(self, message: str, line: int | None = None, column: str | None = None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where += f" at line {line}"
        if column is not None:
            where += f", column {column!r}"
        super().__init__(message + where)


class EmptySetError(DataError):
    """Operation requires a nonempty variable set."""


class DimensionGuardError(DataError):
    """Covariate count exceeds the supported limit.

    Subset enumeration scales as 2**d and no reformulation avoids that
    growth, so we refuse rather than hang.
    """

    def __init__(self, d: int, limit: int, detail: str | None = None):
        self.d = d
        self.limit = limit
        super().__init__(
            f"d={d} covariates exceeds the supported limit of {limit}; "
            + (detail or "the Shapley decomposition enumerates 2**d subsets "
                         "and is intractable at this size")
        )


class DimensionWarning(UserWarning):
    """Covariate count is large enough that runtimes grow noticeably."""


class SingularSubmatrixError(NumericalError):
    """A principal correlation submatrix is numerically singular.

    The 1e-12 determinant gate is this package's choice of tolerance;
    it usually signals (nearly) duplicated covariates.
    """

    def __init__(self, indices: tuple[int, ...], det: float):
        self.indices = indices
        self.det = det
        super().__init__(
            f"correlation submatrix for variables {indices} is numerically "
            f"singular (|det|={abs(det):.3e} < 1e-12); check for duplicated "
            f"or collinear columns"
        )


class SingularCovarianceError(NumericalError):
    """The full sample covariance matrix is not invertible."""


class NotPositiveDefiniteError(NumericalError):
    """A matrix required to be symmetric positive definite is not."""


class NegativeVarianceError(NumericalError):
    """A plug-in variance estimate is negative beyond rounding tolerance."""

    def __init__(self, value: float, index: int):
        self.value = value
        self.index = index
        super().__init__(
            f"estimated asymptotic variance for covariate {index} is "
            f"{value:.3e}, below the -1e-10 rounding allowance"
        )


class DegenerateVarianceError(NumericalError):
    """The variance of a Shapley-value difference is numerically zero
    while the difference itself is not."""


class DegenerateResampleError(NumericalError):
    """Too many bootstrap resamples were degenerate (zero-variance column
    or singular correlation matrix)."""


class InvalidNuError(DataError):
    """Degrees-of-freedom parameter outside the valid range."""

"""Shapley decomposition of regression R-squared with asymptotic inference."""

from .bootstrap import BootstrapConfig, BootstrapResult, bootstrap_ci
from .correlation import CorrelationModel, sample_correlation
from .dataset import Dataset, load_csv
from .decomposition import (
    ShapleyVector,
    population_shapley,
    r_squared_subset,
    shapley_permutation_form,
    shapley_subset_form,
)
from .errors import DataError, NumericalError, ShapleyR2Error
from .inference import (
    DifferenceTest,
    KurtosisEstimate,
    ShapleyCovariance,
    ShapleyInference,
    confidence_intervals,
    difference_test,
    mardia_kurtosis,
    shapley_acov,
)
from .studies import (
    BenchmarkConfig,
    CoverageResult,
    StudyConfig,
    clopper_pearson,
    compound_symmetry_sigma,
    run_benchmark,
    run_study,
)
from .transform import yeo_johnson, yeo_johnson_transform
from .varsets import VariableSet

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "BootstrapConfig",
    "BootstrapResult",
    "bootstrap_ci",
    "CorrelationModel",
    "sample_correlation",
    "Dataset",
    "load_csv",
    "ShapleyVector",
    "population_shapley",
    "r_squared_subset",
    "shapley_permutation_form",
    "shapley_subset_form",
    "DataError",
    "NumericalError",
    "ShapleyR2Error",
    "DifferenceTest",
    "KurtosisEstimate",
    "ShapleyCovariance",
    "ShapleyInference",
    "confidence_intervals",
    "difference_test",
    "mardia_kurtosis",
    "shapley_acov",
    "BenchmarkConfig",
    "CoverageResult",
    "StudyConfig",
    "clopper_pearson",
    "compound_symmetry_sigma",
    "run_benchmark",
    "run_study",
    "VariableSet",
    "yeo_johnson",
    "yeo_johnson_transform",
]

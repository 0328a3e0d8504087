"""Monte Carlo coverage studies and computational benchmarks.

Three data-generating processes, all built on the compound-symmetry
covariance cJ + (1-c)I:

* Study A: multivariate normal.
* Study B: multivariate Student t (heavier tails, kurtosis above 1).
* Study C: normal with a covariance matrix redrawn from a Wishart
  distribution per replicate, so the population Shapley truth varies
  replicate to replicate.

Each replicate draws a sample, builds the requested confidence intervals
for the first Shapley value, and records containment of the population
truth plus the interval width. Cells aggregate to coverage estimates
with Clopper-Pearson bounds and width statistics, one output row per
(study, method, n, c) cell.
"""

from __future__ import annotations

import csv
import io
import json
import time
import tracemalloc
from collections.abc import Callable, Mapping, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
from scipy.stats import beta

from .bootstrap import BootstrapConfig, bootstrap_ci, percentile_interval
from .correlation import sample_correlation
from .dataset import Dataset
from .decomposition import population_shapley
from .errors import (
    InvalidNuError,
    NotPositiveDefiniteError,
    NumericalError,
    ShapleyR2Error,
)
from .inference import intervals_from_model, mardia_kurtosis

__all__ = [
    "StudyConfig",
    "CoverageResult",
    "BenchmarkConfig",
    "compound_symmetry_sigma",
    "sample_mvnormal",
    "sample_mvt",
    "sample_wishart",
    "run_study",
    "run_grid",
    "result_rows",
    "rows_to_csv",
    "rows_to_json",
    "clopper_pearson",
    "run_benchmark",
    "benchmark_rows_to_csv",
]

VALID_STUDIES = ("A", "B", "C")
VALID_METHODS = ("asymptotic", "bootstrap")

#: Abort a cell when more than this fraction of replicates fail for any
#: requested method. Failures below the threshold are excluded with
#: n_effective decremented rather than redrawn; redrawing would bias
#: coverage at the small-n cells where failures concentrate.
MAX_FAILURE_FRACTION = 0.05

#: Output schema, one row per (study, method, n, c) cell. plotfig and
#: any other downstream consumer parse exactly these columns.
RESULT_COLUMNS = (
    "study",
    "method",
    "d",
    "c",
    "n",
    "N",
    "coverage",
    "cp_lower",
    "cp_upper",
    "mean_width",
    "width_p2_5",
    "width_p97_5",
    "n_effective",
    "seed",
)

#: Desk-scale defaults; the full source-protocol grid (30 sample sizes
#: by 7 correlations at N = 1000) stays available as FULL_*.
DESK_N_GRID = (10, 50, 500)
DESK_C_GRID = (0.0, 0.1, 0.3, 0.9)
DESK_REPLICATES = 200

FULL_N_GRID = tuple(range(5, 51, 5)) + tuple(range(100, 2001, 100))
FULL_C_GRID = (0.0, 0.1, 0.2, 0.3, 0.6, 0.9, 0.99)
FULL_REPLICATES = 1000

BENCHMARK_N_GRID = (1000, 5000, 10000)


@dataclass(frozen=True)
class StudyConfig:
    study: str
    d: int = 3
    c: float = 0.3
    n: int = 100
    n_replicates: int = DESK_REPLICATES
    n_bootstrap: int = 1000
    alpha: float = 0.05
    nu: float = 100.0
    seed: int = 0
    methods: tuple[str, ...] = VALID_METHODS

    def __post_init__(self) -> None:
        if self.study not in VALID_STUDIES:
            raise ValueError(f"study must be one of {VALID_STUDIES}, got {self.study!r}")
        if self.d < 1:
            raise ValueError(f"d must be >= 1, got {self.d}")
        if not 0.0 <= self.c < 1.0:
            raise ValueError(f"c must be in [0, 1), got {self.c}")
        if self.n < 3:
            raise ValueError(f"n must be at least 3, got {self.n}")
        if self.n_replicates < 1:
            raise ValueError(f"n_replicates must be positive, got {self.n_replicates}")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must be in (0, 1), got {self.alpha}")
        if not self.methods or any(m not in VALID_METHODS for m in self.methods):
            raise ValueError(f"methods must be a nonempty subset of {VALID_METHODS}")
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.study == "B" and self.nu <= 2.0:
            raise InvalidNuError(
                f"study B needs nu > 2 for a finite covariance, got {self.nu}"
            )
        if self.study == "C" and self.nu < self.d + 1:
            raise InvalidNuError(
                f"study C needs nu >= d+1 = {self.d + 1} for almost surely "
                f"positive definite Wishart draws, got {self.nu}"
            )


@dataclass(frozen=True)
class CoverageResult:
    method: str
    coverage: float
    cp_lower: float
    cp_upper: float
    mean_width: float
    width_p2_5: float
    width_p97_5: float
    n_effective: int


@dataclass(frozen=True)
class BenchmarkConfig:
    n_grid: tuple[int, ...] = BENCHMARK_N_GRID
    d: int = 3
    n_bootstrap: int = 1000
    reps: int = 3
    c: float = 0.3
    alpha: float = 0.05
    seed: int = 0

    def __post_init__(self) -> None:
        if not self.n_grid or any(n < 3 for n in self.n_grid):
            raise ValueError("n_grid must be a nonempty tuple of sizes >= 3")
        if self.reps < 1:
            raise ValueError(f"reps must be positive, got {self.reps}")


def compound_symmetry_sigma(d: int, c: float) -> np.ndarray:
    """The (d+1)-dimensional equicorrelation matrix cJ + (1-c)I."""
    if not 0.0 <= c < 1.0:
        raise ValueError(f"c must be in [0, 1), got {c}")
    sigma = np.full((d + 1, d + 1), c)
    np.fill_diagonal(sigma, 1.0)
    return sigma


def _rng(seed: int | tuple[int, ...] | np.random.SeedSequence) -> np.random.Generator:
    """Generator from an integer seed or a tuple of derivation components.

    Tuple entropy goes straight into SeedSequence, which mixes every
    component; streams derived from distinct tuples are independent
    regardless of execution order.
    """
    if isinstance(seed, np.random.SeedSequence):
        return np.random.default_rng(seed)
    return np.random.default_rng(np.random.SeedSequence(seed))


def _cholesky_factor(sigma: np.ndarray) -> np.ndarray:
    sigma = np.asarray(sigma, dtype=np.float64)
    if sigma.ndim != 2 or sigma.shape[0] != sigma.shape[1]:
        raise ValueError(f"covariance matrix must be square, got shape {sigma.shape}")
    if not np.allclose(sigma, sigma.T, rtol=0.0, atol=1e-12):
        raise NotPositiveDefiniteError("covariance matrix is not symmetric")
    try:
        return np.linalg.cholesky(sigma)
    except np.linalg.LinAlgError:
        raise NotPositiveDefiniteError(
            "covariance matrix is not positive definite"
        ) from None


def _variable_names(p: int) -> list[str]:
    return ["y"] + [f"x{j}" for j in range(1, p)]


def sample_mvnormal(
    sigma: np.ndarray, n: int, seed: int | tuple[int, ...] | np.random.SeedSequence
) -> Dataset:
    """n IID mean-zero multivariate normal rows with covariance sigma."""
    chol = _cholesky_factor(sigma)
    rng = _rng(seed)
    values = rng.standard_normal((n, chol.shape[0])) @ chol.T
    return Dataset(values, _variable_names(chol.shape[0]))


def sample_mvt(
    sigma: np.ndarray,
    nu: float,
    n: int,
    seed: int | tuple[int, ...] | np.random.SeedSequence,
) -> Dataset:
    """n IID rows from the multivariate t with scale sigma and nu dof.

    Each row is Z_i / sqrt(W_i / nu) with Z_i normal(0, sigma) and W_i
    chi-square(nu). The normal block is drawn before the chi-square
    block; reordering would change the stream.
    """
    if nu <= 2.0:
        raise InvalidNuError(
            f"multivariate t sampling needs nu > 2 for a finite covariance, got {nu}"
        )
    chol = _cholesky_factor(sigma)
    rng = _rng(seed)
    normal = rng.standard_normal((n, chol.shape[0])) @ chol.T
    w = rng.chisquare(nu, size=n)
    values = normal / np.sqrt(w / nu)[:, None]
    return Dataset(values, _variable_names(chol.shape[0]))


def sample_wishart(
    scale: np.ndarray, nu: float, seed: int | tuple[int, ...] | np.random.SeedSequence
) -> np.ndarray:
    """One draw from the Wishart distribution W_p(scale, nu).

    Bartlett decomposition: with scale = LL', the draw is L A A' L' where
    A is lower triangular, A[i, i]^2 chi-square with nu - i degrees of
    freedom (zero-based i) and strictly-lower entries standard normal.
    The diagonal chi-squares are drawn before the off-diagonal normals.
    """
    chol = _cholesky_factor(scale)
    p = chol.shape[0]
    if nu < p:
        raise InvalidNuError(
            f"Wishart sampling needs nu >= matrix dimension {p} for almost "
            f"surely positive definite draws, got {nu}"
        )
    rng = _rng(seed)
    a = np.zeros((p, p))
    a[np.diag_indices(p)] = np.sqrt(rng.chisquare(nu - np.arange(p)))
    lower = np.tril_indices(p, k=-1)
    a[lower] = rng.standard_normal(len(lower[0]))
    factor = chol @ a
    draw = factor @ factor.T
    return 0.5 * (draw + draw.T)


def clopper_pearson(successes: int, trials: int, alpha: float) -> tuple[float, float]:
    """Exact binomial confidence interval via beta-distribution quantiles."""
    if trials < 1:
        raise ValueError(f"trials must be at least 1, got {trials}")
    if not 0 <= successes <= trials:
        raise ValueError(f"successes must be in [0, {trials}], got {successes}")
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    if successes == 0:
        lower = 0.0
    else:
        lower = float(beta.ppf(alpha / 2.0, successes, trials - successes + 1))
    if successes == trials:
        upper = 1.0
    else:
        upper = float(beta.ppf(1.0 - alpha / 2.0, successes + 1, trials - successes))
    return lower, upper


def _replicate_entropy(cfg: StudyConfig, i: int, stream: int) -> tuple[int, ...]:
    # n and the c grid position enter the derivation so grid cells never
    # share streams; stream 0 = covariance draw, 1 = sample, 2 = bootstrap.
    return (cfg.seed, ord(cfg.study), cfg.n, round(cfg.c * 1000), i, stream)


def _run_replicate(cfg: StudyConfig, i: int) -> dict[str, tuple[bool, float] | None]:
    """One replicate: draw, compute each method's CI for v_1, record.

    Returns method -> (truth contained, interval width), with None for a
    method that failed on this replicate.
    """
    out: dict[str, tuple[bool, float] | None] = {m: None for m in cfg.methods}
    try:
        if cfg.study == "C":
            scale = compound_symmetry_sigma(cfg.d, cfg.c)
            sigma = sample_wishart(scale, cfg.nu, _replicate_entropy(cfg, i, 0))
        else:
            sigma = compound_symmetry_sigma(cfg.d, cfg.c)
        truth = float(population_shapley(sigma).values[0])
        if cfg.study == "B":
            data = sample_mvt(sigma, cfg.nu, cfg.n, _replicate_entropy(cfg, i, 1))
        else:
            data = sample_mvnormal(sigma, cfg.n, _replicate_entropy(cfg, i, 1))
    except ShapleyR2Error:
        return out
    if "asymptotic" in cfg.methods:
        try:
            model = sample_correlation(data)
            kappa = mardia_kurtosis(data).kappa
            inference = intervals_from_model(model, kappa, cfg.n, cfg.alpha)
            lo, hi = inference.intervals[0]
            out["asymptotic"] = (lo <= truth <= hi, float(hi - lo))
        except ShapleyR2Error:
            pass
    if "bootstrap" in cfg.methods:
        try:
            boot_seed = int(
                np.random.SeedSequence(_replicate_entropy(cfg, i, 2)).generate_state(
                    1, dtype=np.uint64
                )[0]
            )
            boot_cfg = BootstrapConfig(cfg.n_bootstrap, cfg.alpha, boot_seed)
            result = bootstrap_ci(data, boot_cfg)
            lo, hi = result.intervals[0]
            out["bootstrap"] = (lo <= truth <= hi, float(hi - lo))
        except ShapleyR2Error:
            pass
    return out


def _replicate_task(args: tuple[StudyConfig, int]) -> dict[str, tuple[bool, float] | None]:
    return _run_replicate(*args)


def run_study(cfg: StudyConfig, workers: int | None = None) -> dict[str, CoverageResult]:
    """Run one (study, n, c) cell and aggregate per-method coverage.

    Replicates are independent work units seeded from (seed, study, n,
    c, i), so the result is invariant to the parallel schedule.
    ``workers`` > 1 fans replicates out over processes.
    """
    tasks = ((cfg, i) for i in range(cfg.n_replicates))
    if workers is not None and workers > 1:
        chunk = max(1, cfg.n_replicates // (workers * 8))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_replicate_task, tasks, chunksize=chunk))
    else:
        outcomes = [_replicate_task(t) for t in tasks]
    results: dict[str, CoverageResult] = {}
    for method in cfg.methods:
        recorded = [o[method] for o in outcomes if o[method] is not None]
        n_failed = cfg.n_replicates - len(recorded)
        if n_failed > MAX_FAILURE_FRACTION * cfg.n_replicates:
            raise NumericalError(
                f"study {cfg.study} cell (n={cfg.n}, c={cfg.c}): {n_failed} of "
                f"{cfg.n_replicates} replicates failed for method {method!r}, "
                f"over the {MAX_FAILURE_FRACTION:.0%} abort threshold"
            )
        n_effective = len(recorded)
        successes = sum(1 for contained, _ in recorded if contained)
        widths = np.array([width for _, width in recorded])
        cp_lower, cp_upper = clopper_pearson(successes, n_effective, 0.05)
        p_lo, p_hi = percentile_interval(widths, 0.05)
        results[method] = CoverageResult(
            method=method,
            coverage=successes / n_effective,
            cp_lower=cp_lower,
            cp_upper=cp_upper,
            mean_width=float(widths.mean()),
            width_p2_5=p_lo,
            width_p97_5=p_hi,
            n_effective=n_effective,
        )
    return results


def result_rows(cfg: StudyConfig, results: Mapping[str, CoverageResult]) -> list[dict]:
    """Flatten a cell's results into schema rows, one per method."""
    rows = []
    for method in cfg.methods:
        r = results[method]
        rows.append(
            {
                "study": cfg.study,
                "method": method,
                "d": cfg.d,
                "c": cfg.c,
                "n": cfg.n,
                "N": cfg.n_replicates,
                "coverage": r.coverage,
                "cp_lower": r.cp_lower,
                "cp_upper": r.cp_upper,
                "mean_width": r.mean_width,
                "width_p2_5": r.width_p2_5,
                "width_p97_5": r.width_p97_5,
                "n_effective": r.n_effective,
                "seed": cfg.seed,
            }
        )
    return rows


def run_grid(
    cfg: StudyConfig,
    n_values: Sequence[int],
    c_values: Sequence[float],
    workers: int | None = None,
    progress: Callable[[StudyConfig], None] | None = None,
) -> list[dict]:
    """Run every (n, c) cell of a grid with shared study settings."""
    rows: list[dict] = []
    for c in c_values:
        for n in n_values:
            cell = replace(cfg, n=n, c=c)
            if progress is not None:
                progress(cell)
            rows.extend(result_rows(cell, run_study(cell, workers)))
    return rows


def rows_to_csv(rows: Sequence[Mapping]) -> str:
    """Serialize result rows to CSV with the fixed column order."""
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=RESULT_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({col: row[col] for col in RESULT_COLUMNS})
    return buffer.getvalue()


def rows_to_json(rows: Sequence[Mapping]) -> str:
    """Serialize result rows to JSON, keys in schema column order."""
    payload = [{col: row[col] for col in RESULT_COLUMNS} for row in rows]
    return json.dumps(payload, indent=2) + "\n"


def _asymptotic_ci_once(data: Dataset, alpha: float) -> None:
    model = sample_correlation(data)
    kappa = mardia_kurtosis(data).kappa
    intervals_from_model(model, kappa, data.n, alpha)


def _bootstrap_ci_once(data: Dataset, cfg: BootstrapConfig) -> None:
    bootstrap_ci(data, cfg)


def _time_call(fn: Callable[[], None], reps: int) -> float:
    times = []
    for _ in range(reps):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return float(np.mean(times))


def _peak_allocation(fn: Callable[[], None]) -> int:
    tracemalloc.start()
    try:
        fn()
        _, peak = tracemalloc.get_traced_memory()
    finally:
        tracemalloc.stop()
    return int(peak)


def run_benchmark(cfg: BenchmarkConfig) -> list[dict]:
    """Wall-clock and peak-allocation comparison of the two CI methods.

    One row per sample size with per-method means over ``reps`` timing
    repetitions, a separate traced pass for peak allocations, and the
    bootstrap/asymptotic ratios. Timings are hardware-relative; only the
    growth of the time ratio with n is contractual.
    """
    sigma = compound_symmetry_sigma(cfg.d, cfg.c)
    rows = []
    for n in cfg.n_grid:
        data = sample_mvnormal(sigma, n, (cfg.seed, n))
        boot_cfg = BootstrapConfig(cfg.n_bootstrap, cfg.alpha, cfg.seed)
        asym_time = _time_call(lambda: _asymptotic_ci_once(data, cfg.alpha), cfg.reps)
        boot_time = _time_call(lambda: _bootstrap_ci_once(data, boot_cfg), cfg.reps)
        asym_peak = _peak_allocation(lambda: _asymptotic_ci_once(data, cfg.alpha))
        boot_peak = _peak_allocation(lambda: _bootstrap_ci_once(data, boot_cfg))
        rows.append(
            {
                "n": n,
                "d": cfg.d,
                "n_bootstrap": cfg.n_bootstrap,
                "reps": cfg.reps,
                "asymptotic_time_s": asym_time,
                "bootstrap_time_s": boot_time,
                "time_ratio": boot_time / asym_time,
                "asymptotic_peak_bytes": asym_peak,
                "bootstrap_peak_bytes": boot_peak,
                "memory_ratio": boot_peak / asym_peak,
            }
        )
    return rows


BENCHMARK_COLUMNS = (
    "n",
    "d",
    "n_bootstrap",
    "reps",
    "asymptotic_time_s",
    "bootstrap_time_s",
    "time_ratio",
    "asymptotic_peak_bytes",
    "bootstrap_peak_bytes",
    "memory_ratio",
)


def benchmark_rows_to_csv(rows: Sequence[Mapping]) -> str:
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=BENCHMARK_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({col: row[col] for col in BENCHMARK_COLUMNS})
    return buffer.getvalue()

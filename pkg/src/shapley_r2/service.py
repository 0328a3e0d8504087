"""HTTP service exposing the analysis, simulation, and benchmark engines.

The CLI talks to this app in-process by default; running it behind
uvicorn gives the same contract over the network. Request and response
bodies are pydantic models, and package exceptions map to JSON error
envelopes carrying a category the client translates into an exit code
(data -> 2, numeric -> 3, config -> 2).
"""

from __future__ import annotations

from typing import Literal

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from . import __version__
from .bootstrap import BootstrapConfig, bootstrap_ci
from .correlation import sample_correlation
from .dataset import Dataset, load_csv
from .decomposition import shapley_subset_form
from .errors import DataError, NumericalError
from .inference import (
    ShapleyAsymptotics,
    difference_test_from,
    intervals_from_model,
    mardia_kurtosis,
)
from .studies import (
    DESK_C_GRID,
    DESK_N_GRID,
    DESK_REPLICATES,
    FULL_C_GRID,
    FULL_N_GRID,
    FULL_REPLICATES,
    BenchmarkConfig,
    StudyConfig,
    result_rows,
    run_benchmark,
    run_grid,
    run_study,
)
from .transform import transform_dataset

app = FastAPI(title="shapley-r2", version=__version__)


class AnalyzeRequest(BaseModel):
    csv_text: str
    response: str | int | None = None
    alpha: float = 0.05
    transform: Literal["none", "yeo-johnson"] = "none"
    method: Literal["asymptotic", "bootstrap", "both"] = "asymptotic"
    bootstrap_n: int = 1000
    seed: int = 0


class Interval(BaseModel):
    lower: float
    upper: float


class CovariateReport(BaseModel):
    name: str
    shapley: float
    share: float
    asymptotic: Interval | None = None
    bootstrap: Interval | None = None


class AnalyzeResponse(BaseModel):
    n: int
    d: int
    response: str
    r_squared: float
    kappa: float
    alpha: float
    method: str
    seed: int
    covariates: list[CovariateReport]
    lambdas: dict[str, float] | None = None
    rejected_rows: int
    excluded_columns: list[str]


class PairTestRequest(BaseModel):
    csv_text: str
    j: str
    k: str
    response: str | int | None = None
    transform: Literal["none", "yeo-johnson"] = "none"


class PairTestResponse(BaseModel):
    j: str
    k: str
    statistic: float
    p_value: float
    degenerate: bool
    shapley_j: float
    shapley_k: float
    avar_j: float
    avar_k: float
    acov_jk: float
    n: int


class SimulateRequest(BaseModel):
    study: Literal["A", "B", "C"]
    d: int = 3
    c: float | None = None
    n: int | None = None
    replicates: int | None = None
    bootstrap_n: int = 1000
    nu: float = 100.0
    alpha: float = 0.05
    seed: int = 0
    workers: int | None = None
    methods: list[Literal["asymptotic", "bootstrap"]] = Field(
        default=["asymptotic", "bootstrap"]
    )
    full_grid: bool = False


class SimulateResponse(BaseModel):
    rows: list[dict]


class BenchmarkRequest(BaseModel):
    n_grid: list[int] = Field(default=[1000, 5000, 10000])
    d: int = 3
    bootstrap_n: int = 1000
    reps: int = 3
    seed: int = 0


class BenchmarkResponse(BaseModel):
    rows: list[dict]


@app.exception_handler(DataError)
async def data_error_handler(request: Request, exc: DataError) -> JSONResponse:
    return JSONResponse(
        status_code=422,
        content={"category": "data", "error": type(exc).__name__, "message": str(exc)},
    )


@app.exception_handler(NumericalError)
async def numerical_error_handler(request: Request, exc: NumericalError) -> JSONResponse:
    return JSONResponse(
        status_code=500,
        content={"category": "numeric", "error": type(exc).__name__, "message": str(exc)},
    )


@app.exception_handler(ValueError)
async def value_error_handler(request: Request, exc: ValueError) -> JSONResponse:
    return JSONResponse(
        status_code=422,
        content={"category": "config", "error": type(exc).__name__, "message": str(exc)},
    )


@app.get("/healthz")
def healthz() -> dict:
    return {"status": "ok", "version": __version__}


def _load_analysis_data(
    csv_text: str,
    response: str | int | None,
    transform: str,
) -> tuple[Dataset, dict[str, float] | None, int, tuple[str, ...]]:
    load = load_csv(csv_text, response)
    data = load.to_dataset()
    lambdas = None
    if transform == "yeo-johnson":
        data, lambdas = transform_dataset(data)
    return data, lambdas, load.rejected_rows, load.excluded_columns


@app.post("/analyze", response_model=AnalyzeResponse)
def analyze(req: AnalyzeRequest) -> AnalyzeResponse:
    data, lambdas, rejected, excluded = _load_analysis_data(
        req.csv_text, req.response, req.transform
    )
    model = sample_correlation(data)
    kappa = mardia_kurtosis(data).kappa
    shapley = shapley_subset_form(model)
    asymptotic = None
    if req.method in ("asymptotic", "both"):
        asymptotic = intervals_from_model(
            model, kappa, data.n, req.alpha, shapley=shapley
        ).intervals
    boot = None
    if req.method in ("bootstrap", "both"):
        boot_cfg = BootstrapConfig(req.bootstrap_n, req.alpha, req.seed)
        boot = bootstrap_ci(data, boot_cfg).intervals
    r2 = shapley.r_squared
    covariates = []
    for idx, name in enumerate(data.covariate_names):
        value = float(shapley.values[idx])
        covariates.append(
            CovariateReport(
                name=name,
                shapley=value,
                share=value / r2 if r2 > 0.0 else 0.0,
                asymptotic=(
                    Interval(lower=asymptotic[idx, 0], upper=asymptotic[idx, 1])
                    if asymptotic is not None
                    else None
                ),
                bootstrap=(
                    Interval(lower=boot[idx, 0], upper=boot[idx, 1])
                    if boot is not None
                    else None
                ),
            )
        )
    return AnalyzeResponse(
        n=data.n,
        d=data.d,
        response=data.response_name,
        r_squared=r2,
        kappa=kappa,
        alpha=req.alpha,
        method=req.method,
        seed=req.seed,
        covariates=covariates,
        lambdas=lambdas,
        rejected_rows=rejected,
        excluded_columns=list(excluded),
    )


@app.post("/pairtest", response_model=PairTestResponse)
def pairtest(req: PairTestRequest) -> PairTestResponse:
    data, _, _, _ = _load_analysis_data(req.csv_text, req.response, req.transform)
    names = list(data.covariate_names)
    for label in (req.j, req.k):
        if label not in names:
            raise ValueError(
                f"column {label!r} is not an analysis covariate; choose from {names}"
            )
    if req.j == req.k:
        raise ValueError("pairtest needs two distinct covariate columns")
    j = names.index(req.j) + 1
    k = names.index(req.k) + 1
    model = sample_correlation(data)
    kappa = mardia_kurtosis(data).kappa
    shapley = shapley_subset_form(model)
    covariance = ShapleyAsymptotics(model, kappa).shapley_covariance(data.n)
    test = difference_test_from(shapley, covariance, j, k, data.n)
    return PairTestResponse(
        j=req.j,
        k=req.k,
        statistic=test.statistic,
        p_value=test.p_value,
        degenerate=test.degenerate,
        shapley_j=test.shapley_j,
        shapley_k=test.shapley_k,
        avar_j=test.avar_j,
        avar_k=test.avar_k,
        acov_jk=test.acov_jk,
        n=test.n,
    )


@app.post("/simulate", response_model=SimulateResponse)
def simulate(req: SimulateRequest) -> SimulateResponse:
    replicates = req.replicates
    if replicates is None:
        replicates = FULL_REPLICATES if req.full_grid else DESK_REPLICATES
    cfg = StudyConfig(
        study=req.study,
        d=req.d,
        c=req.c if req.c is not None else 0.0,
        n=req.n if req.n is not None else DESK_N_GRID[0],
        n_replicates=replicates,
        n_bootstrap=req.bootstrap_n,
        alpha=req.alpha,
        nu=req.nu,
        seed=req.seed,
        methods=tuple(dict.fromkeys(req.methods)),
    )
    if req.c is not None and req.n is not None:
        rows = result_rows(cfg, run_study(cfg, req.workers))
    else:
        n_grid = (req.n,) if req.n is not None else (
            FULL_N_GRID if req.full_grid else DESK_N_GRID
        )
        c_grid = (req.c,) if req.c is not None else (
            FULL_C_GRID if req.full_grid else DESK_C_GRID
        )
        rows = run_grid(cfg, n_grid, c_grid, req.workers)
    return SimulateResponse(rows=rows)


@app.post("/benchmark", response_model=BenchmarkResponse)
def benchmark(req: BenchmarkRequest) -> BenchmarkResponse:
    cfg = BenchmarkConfig(
        n_grid=tuple(req.n_grid),
        d=req.d,
        n_bootstrap=req.bootstrap_n,
        reps=req.reps,
        seed=req.seed,
    )
    return BenchmarkResponse(rows=run_benchmark(cfg))

"""Command-line surface, a thin client over the HTTP service.

Every subcommand builds a request, sends it to the service app, and
renders the JSON response. By default the app is called in-process
through an ASGI transport (no socket, fully offline); ``--server`` points
the same requests at a remote instance instead. Exit codes: 0 success,
2 data/config error, 3 numerical error.
"""

from __future__ import annotations

import asyncio
import json
import os
import sys
from pathlib import Path

import click
import httpx

EXIT_CODES = {"data": 2, "config": 2, "numeric": 3}


def _post(path: str, payload: dict, server: str | None) -> dict:
    """Send one request and return the decoded body, exiting on failure."""
    if server is None:
        from .service import app

        async def call() -> httpx.Response:
            transport = httpx.ASGITransport(app=app)
            async with httpx.AsyncClient(
                transport=transport, base_url="http://shapley-r2", timeout=None
            ) as client:
                return await client.post(path, json=payload)

        response = asyncio.run(call())
    else:
        try:
            response = httpx.post(server.rstrip("/") + path, json=payload, timeout=None)
        except httpx.HTTPError as exc:
            click.echo(f"error: cannot reach {server}: {exc}", err=True)
            sys.exit(1)
    if response.status_code == 200:
        return response.json()
    try:
        body = response.json()
    except ValueError:
        body = {}
    if "category" in body:
        click.echo(f"error: {body['message']}", err=True)
        sys.exit(EXIT_CODES.get(body["category"], 1))
    # pydantic request validation or an unexpected failure
    click.echo(f"error: {body.get('detail', response.text)}", err=True)
    sys.exit(2 if response.status_code == 422 else 1)


def _emit(text: str, out: str | None) -> None:
    if out is None:
        click.echo(text, nl=False)
    else:
        Path(out).write_text(text)


def _fmt_interval(lower: float, upper: float) -> str:
    # Mirrors the reference table layout: two decimals, the lower
    # endpoint keeps a sign slot, negative zero prints as -0.00.
    return f"({lower: .2f},{upper:.2f})"


def _analyze_table(result: dict) -> str:
    lines = [
        f"n = {result['n']}   d = {result['d']}   response = {result['response']}",
        f"R^2 = {result['r_squared']:.4f}   kappa = {result['kappa']:.4f}   "
        f"alpha = {result['alpha']}",
    ]
    if result.get("lambdas"):
        pairs = ", ".join(f"{k}={v:.2f}" for k, v in result["lambdas"].items())
        lines.append(f"yeo-johnson lambdas: {pairs}")
    name_width = max(9, max(len(c["name"]) for c in result["covariates"]))
    header = f"{'covariate':<{name_width}}  {'shapley':>8}  {'share':>6}"
    methods = [m for m in ("asymptotic", "bootstrap") if result["covariates"][0][m]]
    for m in methods:
        header += f"  {m:>14}"
    lines.append(header)
    for cov in result["covariates"]:
        row = (
            f"{cov['name']:<{name_width}}  {cov['shapley']:>8.2f}  "
            f"{cov['share']:>6.2f}"
        )
        for m in methods:
            row += f"  {_fmt_interval(cov[m]['lower'], cov[m]['upper']):>14}"
        lines.append(row)
    return "\n".join(lines) + "\n"


def _analyze_csv(result: dict) -> str:
    columns = ["covariate", "shapley", "share"]
    methods = [m for m in ("asymptotic", "bootstrap") if result["covariates"][0][m]]
    for m in methods:
        columns += [f"{m}_lower", f"{m}_upper"]
    rows = [",".join(columns)]
    for cov in result["covariates"]:
        cells = [cov["name"], repr(cov["shapley"]), repr(cov["share"])]
        for m in methods:
            cells += [repr(cov[m]["lower"]), repr(cov[m]["upper"])]
        rows.append(",".join(cells))
    return "\n".join(rows) + "\n"


def _to_json(payload: dict) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _default_workers() -> int | None:
    raw = os.environ.get("SHAPLEY_R2_WORKERS")
    return int(raw) if raw else None


@click.group()
@click.option("--server", default=None, metavar="URL",
              help="Send requests to a running service instead of in-process.")
@click.pass_context
def main(ctx: click.Context, server: str | None) -> None:
    """Shapley decomposition of regression R-squared with inference."""
    ctx.obj = server


@main.command()
@click.argument("csv_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--response", default=None, help="Response column name or index.")
@click.option("--alpha", default=0.05, show_default=True)
@click.option("--transform", type=click.Choice(["none", "yeo-johnson"]),
              default="none", show_default=True)
@click.option("--method", type=click.Choice(["asymptotic", "bootstrap", "both"]),
              default="asymptotic", show_default=True)
@click.option("--bootstrap-n", default=1000, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", default=None, type=click.Path(dir_okay=False),
              help="Write the report to a file instead of stdout.")
@click.option("--format", "fmt", type=click.Choice(["json", "csv", "table"]),
              default="table", show_default=True)
@click.pass_obj
def analyze(server: str | None, csv_path: str, response: str | None, alpha: float,
            transform: str, method: str, bootstrap_n: int, seed: int,
            out: str | None, fmt: str) -> None:
    """Decompose R-squared over the covariates of a CSV dataset."""
    payload = {
        "csv_text": Path(csv_path).read_text(),
        "response": response,
        "alpha": alpha,
        "transform": transform,
        "method": method,
        "bootstrap_n": bootstrap_n,
        "seed": seed,
    }
    result = _post("/analyze", payload, server)
    if result["rejected_rows"]:
        click.echo(
            f"note: rejected {result['rejected_rows']} rows with "
            f"missing/non-numeric analysis cells", err=True)
    if result["excluded_columns"]:
        click.echo(
            f"note: excluded non-numeric columns: "
            f"{', '.join(result['excluded_columns'])}", err=True)
    if fmt == "json":
        _emit(_to_json(result), out)
    elif fmt == "csv":
        _emit(_analyze_csv(result), out)
    else:
        _emit(_analyze_table(result), out)


@main.command()
@click.argument("csv_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--j", "j", required=True, help="First covariate column name.")
@click.option("--k", "k", required=True, help="Second covariate column name.")
@click.option("--response", default=None, help="Response column name or index.")
@click.option("--transform", type=click.Choice(["none", "yeo-johnson"]),
              default="none", show_default=True)
@click.option("--format", "fmt", type=click.Choice(["json", "table"]),
              default="table", show_default=True)
@click.pass_obj
def pairtest(server: str | None, csv_path: str, j: str, k: str,
             response: str | None, transform: str, fmt: str) -> None:
    """Test whether two covariates share the same Shapley attribution."""
    payload = {
        "csv_text": Path(csv_path).read_text(),
        "j": j,
        "k": k,
        "response": response,
        "transform": transform,
    }
    result = _post("/pairtest", payload, server)
    if fmt == "json":
        click.echo(_to_json(result), nl=False)
        return
    lines = [
        f"H0: shapley({result['j']}) = shapley({result['k']})   n = {result['n']}",
        f"shapley_j = {result['shapley_j']:.6f}   shapley_k = {result['shapley_k']:.6f}",
        f"avar_j = {result['avar_j']:.6e}   avar_k = {result['avar_k']:.6e}   "
        f"acov_jk = {result['acov_jk']:.6e}",
        f"statistic = {result['statistic']:.6f}   p_value = {result['p_value']:.6g}",
    ]
    if result["degenerate"]:
        lines.append("degenerate: difference and its variance are numerically zero")
    click.echo("\n".join(lines))


@main.command()
@click.option("--study", type=click.Choice(["A", "B", "C"]), required=True)
@click.option("--d", default=3, show_default=True)
@click.option("--c", default=None, type=float, help="Equicorrelation; omit to sweep the grid.")
@click.option("--n", default=None, type=int, help="Sample size; omit to sweep the grid.")
@click.option("--replicates", default=None, type=int,
              help="Monte Carlo replicates per cell [default: 200; 1000 with --full-grid].")
@click.option("--bootstrap-n", default=1000, show_default=True)
@click.option("--nu", default=100.0, show_default=True)
@click.option("--alpha", default=0.05, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--workers", default=None, type=int,
              help="Worker processes [default: SHAPLEY_R2_WORKERS or serial].")
@click.option("--methods", default="asymptotic,bootstrap", show_default=True,
              help="Comma-separated subset of asymptotic,bootstrap.")
@click.option("--full-grid", is_flag=True,
              help="Sweep the full reference grid instead of the desk-scale one.")
@click.option("--out", default=None, type=click.Path(dir_okay=False),
              help="Base path; writes BASE.csv and BASE.json.")
@click.pass_obj
def simulate(server: str | None, study: str, d: int, c: float | None, n: int | None,
             replicates: int | None, bootstrap_n: int, nu: float, alpha: float,
             seed: int, workers: int | None, methods: str, full_grid: bool,
             out: str | None) -> None:
    """Run a Monte Carlo coverage study and write its result rows."""
    payload = {
        "study": study,
        "d": d,
        "c": c,
        "n": n,
        "replicates": replicates,
        "bootstrap_n": bootstrap_n,
        "nu": nu,
        "alpha": alpha,
        "seed": seed,
        "workers": workers if workers is not None else _default_workers(),
        "methods": [m.strip() for m in methods.split(",") if m.strip()],
        "full_grid": full_grid,
    }
    result = _post("/simulate", payload, server)
    rows = result["rows"]
    from .studies import rows_to_csv, rows_to_json

    header = f"{'study':<5} {'method':<10} {'c':>5} {'n':>5} {'coverage':>8} " \
             f"{'cp_lower':>8} {'cp_upper':>8} {'mean_width':>10} {'n_eff':>5}"
    click.echo(header)
    for row in rows:
        click.echo(
            f"{row['study']:<5} {row['method']:<10} {row['c']:>5.2f} {row['n']:>5} "
            f"{row['coverage']:>8.3f} {row['cp_lower']:>8.3f} {row['cp_upper']:>8.3f} "
            f"{row['mean_width']:>10.4f} {row['n_effective']:>5}"
        )
    if out is not None:
        base = Path(out)
        if base.suffix in (".csv", ".json"):
            base = base.with_suffix("")
        base.with_suffix(".csv").write_text(rows_to_csv(rows))
        base.with_suffix(".json").write_text(rows_to_json(rows))
        click.echo(f"wrote {base.with_suffix('.csv')} and {base.with_suffix('.json')}")


@main.command()
@click.option("--n-grid", default="1000,5000,10000", show_default=True,
              help="Comma-separated sample sizes.")
@click.option("--d", default=3, show_default=True)
@click.option("--bootstrap-n", default=1000, show_default=True)
@click.option("--reps", default=3, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.pass_obj
def benchmark(server: str | None, n_grid: str, d: int, bootstrap_n: int,
              reps: int, seed: int) -> None:
    """Compare wall-clock and peak allocation of the two CI methods."""
    payload = {
        "n_grid": [int(x) for x in n_grid.split(",") if x.strip()],
        "d": d,
        "bootstrap_n": bootstrap_n,
        "reps": reps,
        "seed": seed,
    }
    result = _post("/benchmark", payload, server)
    click.echo(
        f"{'n':>6} {'asym_s':>9} {'boot_s':>9} {'time_ratio':>10} "
        f"{'asym_peak':>10} {'boot_peak':>10} {'mem_ratio':>9}"
    )
    for row in result["rows"]:
        click.echo(
            f"{row['n']:>6} {row['asymptotic_time_s']:>9.4f} "
            f"{row['bootstrap_time_s']:>9.4f} {row['time_ratio']:>10.1f} "
            f"{row['asymptotic_peak_bytes']:>10} {row['bootstrap_peak_bytes']:>10} "
            f"{row['memory_ratio']:>9.2f}"
        )


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
def serve(host: str, port: int) -> None:
    """Run the HTTP service under uvicorn."""
    import uvicorn

    from .service import app

    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()

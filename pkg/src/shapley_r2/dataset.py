"""Numeric dataset container and CSV ingestion.

Column 0 of a :class:`Dataset` is the response, columns 1..d the
covariates. CSV loading is strict by design: structural problems raise
:class:`~shapley_r2.errors.ParseError`, and rows with missing cells in
analysis columns are dropped loudly (the count travels with the load
report) rather than imputed, because silently changing ``n`` would change
every downstream inference.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, NonFiniteDataError, ParseError, ZeroVarianceError

__all__ = ["Dataset", "CsvLoad", "load_csv"]

#: Cell values treated as missing during CSV ingestion.
MISSING_TOKENS = frozenset({"", "na", "n/a", "nan", "null", "none"})


@dataclass(frozen=True)
class Dataset:
    """An n x (d+1) matrix of finite reals; column 0 is the response.

    Instances are immutable and safe to share across threads. Validation
    happens once, at construction: every inference operation in the
    package can assume the invariants hold.
    """

    values: np.ndarray
    column_names: tuple[str, ...] = field(default=())

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise DataError(f"dataset must be 2-dimensional, got shape {values.shape}")
        n, p = values.shape
        if p < 2:
            raise DataError("dataset needs a response and at least one covariate")
        if n < 3:
            raise DataError(f"dataset needs at least 3 rows, got {n}")
        if not np.isfinite(values).all():
            raise NonFiniteDataError("dataset contains NaN or infinite entries")
        names = tuple(self.column_names) or tuple(f"Z{j}" for j in range(p))
        if len(names) != p:
            raise DataError(f"{len(names)} column names for {p} columns")
        spans = np.ptp(values, axis=0)
        for j in np.flatnonzero(spans == 0.0):
            raise ZeroVarianceError(names[int(j)])
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "column_names", names)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1] - 1

    @property
    def response_name(self) -> str:
        return self.column_names[0]

    @property
    def covariate_names(self) -> tuple[str, ...]:
        return self.column_names[1:]


@dataclass(frozen=True)
class CsvLoad:
    """Result of parsing a CSV into analysis columns.

    The matrix has the response in column 0 and the surviving numeric
    covariates in file order; ``rejected_rows`` counts data rows dropped
    for missing/non-finite analysis cells, ``excluded_columns`` names
    non-numeric columns left out of the analysis.
    """

    matrix: np.ndarray
    column_names: tuple[str, ...]
    rejected_rows: int
    excluded_columns: tuple[str, ...]

    def to_dataset(self) -> Dataset:
        return Dataset(self.matrix, self.column_names)


def _parse_cell(cell: str) -> float | None:
    """Float value of a cell, or None when missing/unparseable."""
    text = cell.strip()
    if text.lower() in MISSING_TOKENS:
        return None
    try:
        return float(text)
    except ValueError:
        return None


def load_csv(text: str, response: str | int | None = None) -> CsvLoad:
    """Parse CSV text into an analysis matrix.

    A header row is required. A column takes part in the analysis when
    every non-missing cell in it parses as a number; columns where
    nothing parses are treated as categorical and excluded. A column
    that mixes numbers with non-numeric text is ambiguous and raises
    ``ParseError`` naming the first offending cell.
    """
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError("empty CSV input") from None
    header = [h.strip() for h in header]
    if any(not h for h in header):
        raise ParseError("header row contains an empty column name", line=1)
    if len(set(header)) != len(header):
        dupes = sorted({h for h in header if header.count(h) > 1})
        raise ParseError(f"duplicate column names {dupes}", line=1)

    rows: list[list[str]] = []
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise ParseError(
                f"expected {len(header)} fields, found {len(row)}", line=lineno
            )
        rows.append(row)
    if not rows:
        raise ParseError("CSV contains a header but no data rows")

    ncols = len(header)
    parsed = [[_parse_cell(row[j]) for j in range(ncols)] for row in rows]

    numeric_cols: list[int] = []
    excluded: list[str] = []
    for j in range(ncols):
        cells = [(i, row[j]) for i, row in enumerate(parsed)]
        n_parsed = sum(1 for _, v in cells if v is not None)
        n_nonmissing = sum(
            1 for i, _ in cells if rows[i][j].strip().lower() not in MISSING_TOKENS
        )
        if n_parsed == 0:
            excluded.append(header[j])
        elif n_parsed < n_nonmissing:
            bad = next(
                i
                for i, v in cells
                if v is None and rows[i][j].strip().lower() not in MISSING_TOKENS
            )
            raise ParseError(
                f"non-numeric value {rows[bad][j].strip()!r} in a numeric column",
                line=bad + 2,
                column=header[j],
            )
        else:
            numeric_cols.append(j)

    response_idx = _resolve_response(header, numeric_cols, response)
    analysis_cols = [response_idx] + [j for j in numeric_cols if j != response_idx]
    if len(analysis_cols) < 2:
        raise ParseError("no numeric covariate columns besides the response")

    kept: list[list[float]] = []
    rejected = 0
    for row in parsed:
        cells = [row[j] for j in analysis_cols]
        if any(v is None or not np.isfinite(v) for v in cells):
            rejected += 1
        else:
            kept.append(cells)  # type: ignore[arg-type]
    if len(kept) < 3:
        raise ParseError(
            f"only {len(kept)} complete rows after rejecting {rejected}; need at least 3"
        )

    matrix = np.array(kept, dtype=np.float64)
    names = tuple(header[j] for j in analysis_cols)
    return CsvLoad(matrix, names, rejected, tuple(excluded))


def _resolve_response(
    header: list[str], numeric_cols: list[int], response: str | int | None
) -> int:
    # A header name match wins over the index reading, so a column
    # literally named "0" stays addressable by name.
    if response is None:
        idx = 0
    elif isinstance(response, str) and response in header:
        idx = header.index(response)
    elif isinstance(response, int) or (isinstance(response, str) and response.isdigit()):
        idx = int(response)
        if not 0 <= idx < len(header):
            raise ParseError(f"response column index {idx} out of range")
    else:
        raise ParseError(f"response column {response!r} not found in header")
    if idx not in numeric_cols:
        raise ParseError(f"response column {header[idx]!r} is not numeric")
    return idx

"""Per-cell tabular data: validated containers and CSV ingestion/export.

The canonical interchange format is CSV with a header row, UTF-8,
locale-independent dot-decimal numbers. Rows that fail validation abort
ingestion (silent drops would desynchronize spatial indices downstream).
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd

from .errors import FormatError, SchemaError, ValidationError


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class Matrix:
    """Dense real matrix with named columns (row-major storage)."""

    values: np.ndarray
    col_names: tuple[str, ...]

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2:
            raise ValidationError(f"matrix values must be 2-D, got {v.ndim}-D")
        names = tuple(str(c) for c in self.col_names)
        if len(names) != v.shape[1]:
            raise ValidationError(
                f"{len(names)} column names for {v.shape[1]} columns"
            )
        object.__setattr__(self, "values", _frozen(v))
        object.__setattr__(self, "col_names", names)

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @property
    def cols(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class CellTable:
    """One row per cell: id, 2-D center coordinates, type label, expression.

    Immutable after construction; safe to share across concurrent readers.
    """

    ids: tuple[str, ...]
    coords: np.ndarray  # (N, 2)
    cell_types: tuple[str, ...]
    expression: np.ndarray  # (N, D)
    feature_names: tuple[str, ...]

    def __post_init__(self):
        ids = tuple(str(i) for i in self.ids)
        types = tuple(str(t) for t in self.cell_types)
        coords = np.asarray(self.coords, dtype=float)
        expr = np.asarray(self.expression, dtype=float)
        names = tuple(str(f) for f in self.feature_names)

        n = len(ids)
        if n < 1:
            raise ValidationError("cell table must contain at least one row")
        if coords.shape != (n, 2):
            raise ValidationError(f"coords must be ({n}, 2), got {coords.shape}")
        if expr.ndim != 2 or expr.shape[0] != n:
            raise ValidationError(f"expression must have {n} rows, got {expr.shape}")
        if len(types) != n:
            raise ValidationError("cell_types length does not match ids")
        if len(names) != expr.shape[1]:
            raise ValidationError("feature_names do not align with expression columns")
        if len(set(ids)) != n:
            dupes = sorted({i for i in ids if ids.count(i) > 1})
            raise ValidationError(f"duplicate cell ids: {dupes[:5]}")
        if len(set(names)) != len(names):
            raise ValidationError("feature names are not unique")
        bad = ~np.isfinite(coords).all(axis=1) | ~np.isfinite(expr).all(axis=1)
        if bad.any():
            rows = np.flatnonzero(bad)
            raise ValidationError(
                f"non-finite coordinate or expression values in data rows {rows.tolist()[:20]}"
            )

        object.__setattr__(self, "ids", ids)
        object.__setattr__(self, "cell_types", types)
        object.__setattr__(self, "coords", _frozen(coords))
        object.__setattr__(self, "expression", _frozen(expr))
        object.__setattr__(self, "feature_names", names)

    @property
    def n(self) -> int:
        return len(self.ids)

    @property
    def d(self) -> int:
        return self.expression.shape[1]

    def expression_matrix(self) -> Matrix:
        return Matrix(self.expression, self.feature_names)


@dataclass(frozen=True)
class ColumnSchema:
    """Names the id, coordinate, cell-type, and expression columns of a CSV.

    Expression columns are either listed explicitly or given as an inclusive
    header span (first, last), resolved against the file's column order.
    """

    id: str
    x: str
    y: str
    cell_type: str
    expression: tuple[str, ...] = ()
    expression_span: tuple[str, str] | None = None

    def resolve_expression(self, header: list[str]) -> list[str]:
        if self.expression:
            return [str(c) for c in self.expression]
        if self.expression_span is not None:
            first, last = self.expression_span
            for name in (first, last):
                if name not in header:
                    raise SchemaError(f"expression span column not in file: {name!r}")
            i, j = header.index(first), header.index(last)
            if i > j:
                raise SchemaError(f"expression span out of order: {first!r} after {last!r}")
            return header[i : j + 1]
        raise SchemaError("schema names no expression columns")


def load_cells_csv(path: str | Path, schema: ColumnSchema) -> CellTable:
    """Read and validate a per-cell CSV into a CellTable.

    Any row with a non-finite (or non-numeric) coordinate or expression value
    aborts ingestion with the offending 0-based data-row indices in the error.
    """
    path = Path(path)
    try:
        frame = pd.read_csv(path, float_precision="round_trip")
    except pd.errors.EmptyDataError:
        raise FormatError(f"empty CSV file: {path}") from None

    header = [str(c) for c in frame.columns]
    expr_cols = schema.resolve_expression(header)
    for col in [schema.id, schema.x, schema.y, schema.cell_type, *expr_cols]:
        if col not in header:
            raise SchemaError(f"missing column: {col!r}")
    if frame.shape[0] == 0:
        raise ValidationError(f"no data rows in {path}")

    ids = frame[schema.id].astype(str).tolist()
    if len(set(ids)) != len(ids):
        counts = pd.Series(ids).value_counts()
        dupes = sorted(counts[counts > 1].index.tolist())
        raise ValidationError(f"duplicate cell ids: {dupes[:5]}")

    coords = np.column_stack(
        [
            pd.to_numeric(frame[schema.x], errors="coerce").to_numpy(float),
            pd.to_numeric(frame[schema.y], errors="coerce").to_numpy(float),
        ]
    )
    expr = np.column_stack(
        [pd.to_numeric(frame[c], errors="coerce").to_numpy(float) for c in expr_cols]
    )
    bad = ~np.isfinite(coords).all(axis=1) | ~np.isfinite(expr).all(axis=1)
    if bad.any():
        rows = np.flatnonzero(bad)
        raise ValidationError(
            f"non-finite coordinate or expression values in data rows {rows.tolist()[:20]}"
        )

    return CellTable(
        ids=tuple(ids),
        coords=coords,
        cell_types=tuple(frame[schema.cell_type].astype(str).tolist()),
        expression=expr,
        feature_names=tuple(expr_cols),
    )


def write_cells_csv(table: CellTable, path: str | Path) -> ColumnSchema:
    """Write a CellTable with canonical column names; returns the schema to re-read it."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "x", "y", "cell_type", *table.feature_names])
        for i in range(table.n):
            writer.writerow(
                [
                    table.ids[i],
                    repr(float(table.coords[i, 0])),
                    repr(float(table.coords[i, 1])),
                    table.cell_types[i],
                    *[repr(float(v)) for v in table.expression[i]],
                ]
            )
    return ColumnSchema(
        id="id", x="x", y="y", cell_type="cell_type", expression=table.feature_names
    )


def write_matrix_csv(m: Matrix, path: str | Path, ids: tuple[str, ...] | None = None) -> None:
    """Write a Matrix as CSV; floats use repr so a round-trip read is exact.

    When `ids` is given an `id` column is prepended.
    """
    if m.cols == 0:
        raise FormatError("refusing to write a matrix with zero columns")
    if ids is not None and len(ids) != m.rows:
        raise ValidationError(f"{len(ids)} ids for {m.rows} rows")
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        if ids is None:
            writer.writerow(m.col_names)
            for row in m.values:
                writer.writerow([repr(float(v)) for v in row])
        else:
            writer.writerow(["id", *m.col_names])
            for rid, row in zip(ids, m.values):
                writer.writerow([rid, *[repr(float(v)) for v in row]])


def read_matrix_csv(path: str | Path, has_ids: bool = False) -> tuple[Matrix, tuple[str, ...] | None]:
    """Inverse of write_matrix_csv; returns (matrix, ids or None)."""
    path = Path(path)
    with path.open("r", newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise FormatError(f"empty CSV file: {path}") from None
        rows = list(reader)
    if has_ids:
        ids = tuple(r[0] for r in rows)
        values = [[float(v) for v in r[1:]] for r in rows]
        names = header[1:]
    else:
        ids = None
        values = [[float(v) for v in r] for r in rows]
        names = header
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        arr = arr.reshape(len(rows), len(names))
    return Matrix(arr, tuple(names)), ids

"""Per-neighborhood quantile featurization.

For every cell, each reduced-expression component is summarized by Z quantiles
of its values over the cell's spatial neighborhood, giving an N x (P*Z) block.
The quantile estimator is linear interpolation between order statistics with
q(0)=min and q(1)=max; conventions differ at small n, so one is pinned here to
keep results exactly reproducible.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .data import Matrix
from .errors import ValidationError
from .neighbors import SpatialIndex, neighborhoods_all


@dataclass(frozen=True)
class QuantileSpec:
    """Evenly spaced inclusive grid of `count` percentile levels."""

    min_percentile: float
    max_percentile: float
    count: int

    def __post_init__(self):
        if not 0.0 <= self.min_percentile <= self.max_percentile <= 1.0:
            raise ValidationError(
                f"need 0 <= min <= max <= 1, got [{self.min_percentile}, {self.max_percentile}]"
            )
        if self.count < 1:
            raise ValidationError("quantile count must be >= 1")
        if self.count == 1 and self.min_percentile != self.max_percentile:
            raise ValidationError("a single quantile requires min == max")

    def levels(self) -> np.ndarray:
        if self.count == 1:
            return np.array([self.min_percentile])
        return np.linspace(self.min_percentile, self.max_percentile, self.count)


@dataclass(frozen=True)
class FeatureBlock:
    """A named N x p matrix produced by one featurization function."""

    name: str
    matrix: Matrix
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        if not np.isfinite(self.matrix.values).all():
            raise ValidationError(f"feature block {self.name!r} contains non-finite values")
        if len(set(self.matrix.col_names)) != len(self.matrix.col_names):
            raise ValidationError(f"feature block {self.name!r} has duplicate column names")

    @property
    def values(self) -> np.ndarray:
        return self.matrix.values

    @property
    def col_names(self) -> tuple[str, ...]:
        return self.matrix.col_names


def quantiles_of(values: np.ndarray, spec: QuantileSpec) -> np.ndarray:
    """Z quantiles of `values` (linear order-statistic interpolation), non-decreasing."""
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise ValidationError("cannot take quantiles of an empty set")
    return np.quantile(values, spec.levels(), method="linear")


def percentile_label(q: float) -> str:
    if abs(q - round(q, 2)) < 1e-9:
        return f"q{q:.2f}"
    return f"q{q:.4f}"


def quantile_matrix(
    reduced: Matrix,
    index: SpatialIndex,
    radius: float,
    k_max: int | None,
    spec: QuantileSpec,
) -> FeatureBlock:
    """Quantile block over all cells: columns are component-major
    (all quantiles of component 1, then component 2, ...), named
    like PC_3_q0.25 after the source column and percentile level.
    """
    x = reduced.values
    if x.shape[0] != index.n:
        raise ValidationError(
            f"reduced matrix has {x.shape[0]} rows for {index.n} indexed points"
        )
    levels = spec.levels()
    p, z = x.shape[1], len(levels)
    members = neighborhoods_all(index, radius, k_max)

    out = np.empty((index.n, p * z))
    for i, m in enumerate(members):
        sub = x[m]  # (n_i, P)
        qs = np.quantile(sub, levels, axis=0, method="linear")  # (Z, P)
        out[i] = qs.T.reshape(-1)

    names = tuple(
        f"{col}_{percentile_label(q)}" for col in reduced.col_names for q in levels
    )
    return FeatureBlock(
        name="quantile",
        matrix=Matrix(out, names),
        provenance={
            "featurization": "neighborhood-quantiles",
            "radius": float(radius),
            "k_max": None if k_max is None else int(k_max),
            "min_percentile": spec.min_percentile,
            "max_percentile": spec.max_percentile,
            "count": spec.count,
        },
    )

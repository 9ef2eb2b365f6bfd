"""Column standardization and PCA producing the reduced matrix for featurization.

PCA is computed by eigendecomposition of the sample covariance (the feature
counts in this domain are small, a few dozen columns), with a deterministic
sign convention: each loading column's largest-magnitude entry is positive.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Matrix, _frozen
from .errors import ValidationError


@dataclass(frozen=True)
class PcaModel:
    means: np.ndarray  # (D,)
    scales: np.ndarray  # (D,), all ones when standardize=False
    loadings: np.ndarray  # (D, P), orthonormal columns
    explained_variance: np.ndarray  # (P,), non-increasing
    total_variance: float
    target_reached: bool  # False when even full rank missed the variance target

    @property
    def n_components(self) -> int:
        return self.loadings.shape[1]

    @property
    def explained_fraction(self) -> np.ndarray:
        return self.explained_variance / self.total_variance


def fit_pca(expression: Matrix, variance_target: float, standardize: bool = True) -> PcaModel:
    """Fit PCA keeping the smallest number of components whose cumulative
    explained variance reaches `variance_target` (a fraction in (0, 1]).

    Columns are z-scored first unless standardize=False; zero-variance columns
    get scale 1 so they contribute nothing after centering.
    """
    if not 0.0 < variance_target <= 1.0:
        raise ValidationError(f"variance_target must be in (0, 1], got {variance_target}")
    x = np.asarray(expression.values, dtype=float)
    n, d = x.shape
    if n < 2:
        raise ValidationError("PCA requires at least 2 rows")

    means = x.mean(axis=0)
    if standardize:
        scales = x.std(axis=0, ddof=1)
        # a constant column's std is float dust, not signal; scaling by it
        # would manufacture unit variance out of rounding noise
        near_constant = scales <= 100 * np.finfo(float).eps * np.maximum(1.0, np.abs(means))
        scales[near_constant] = 1.0
    else:
        scales = np.ones(d)
    xc = (x - means) / scales

    cov = (xc.T @ xc) / (n - 1)
    eigvals, eigvecs = np.linalg.eigh(cov)
    order = np.argsort(eigvals)[::-1]
    eigvals = np.clip(eigvals[order], 0.0, None)
    eigvecs = eigvecs[:, order]

    total = float(eigvals.sum())
    if total <= 0.0:
        # all-constant input: a single null component
        loadings = eigvecs[:, :1]
        return PcaModel(
            means=_frozen(means),
            scales=_frozen(scales),
            loadings=_frozen(_fix_signs(loadings)),
            explained_variance=_frozen(eigvals[:1]),
            total_variance=0.0,
            target_reached=True,
        )

    cumfrac = np.cumsum(eigvals) / total
    reached = cumfrac >= variance_target - 1e-12
    if reached.any():
        p = int(np.argmax(reached)) + 1
        target_reached = True
    else:
        p = d
        target_reached = False

    return PcaModel(
        means=_frozen(means),
        scales=_frozen(scales),
        loadings=_frozen(_fix_signs(eigvecs[:, :p])),
        explained_variance=_frozen(eigvals[:p]),
        total_variance=total,
        target_reached=target_reached,
    )


def pca_transform(model: PcaModel, expression: Matrix) -> Matrix:
    """Project expression rows onto the fitted components; columns PC_1..PC_P."""
    x = np.asarray(expression.values, dtype=float)
    if x.shape[1] != model.means.shape[0]:
        raise ValidationError(
            f"expression has {x.shape[1]} columns, model expects {model.means.shape[0]}"
        )
    scores = ((x - model.means) / model.scales) @ model.loadings
    names = tuple(f"PC_{i + 1}" for i in range(model.n_components))
    return Matrix(scores, names)


def _fix_signs(loadings: np.ndarray) -> np.ndarray:
    loadings = loadings.copy()
    for j in range(loadings.shape[1]):
        k = int(np.argmax(np.abs(loadings[:, j])))
        if loadings[k, j] < 0:
            loadings[:, j] = -loadings[:, j]
    return loadings

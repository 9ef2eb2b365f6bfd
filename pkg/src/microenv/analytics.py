"""Cluster comparison summaries: differential features, composition, histograms.

Differential ranking is the spread (max minus min) of per-cluster medians over
the selected clusters; it reduces to the absolute median difference for a
two-cluster comparison and generalizes monotonically to more. Histogram bins
are shared across compared clusters so their distributions are commensurable.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

DEFAULT_BINS = 30


@dataclass(frozen=True)
class Histogram:
    edges: np.ndarray  # (bins + 1,)
    counts: np.ndarray  # (bins,), last bin right-inclusive


@dataclass(frozen=True)
class ClusterSummary:
    clusters: tuple[int, ...]
    feature_names: tuple[str, ...]
    type_names: tuple[str, ...]
    counts: np.ndarray  # (k,)
    medians: np.ndarray  # (k, D)
    means: np.ndarray  # (k, D)
    composition: np.ndarray  # (k, n_types), rows sum to 1
    histograms: np.ndarray  # (k, D, bins)
    hist_edges: np.ndarray  # (D, bins + 1), shared across clusters


@dataclass(frozen=True)
class DifferentialFeature:
    name: str
    spread: float
    medians: dict[int, float]


def build_cluster_summary(
    expression: np.ndarray,
    feature_names: tuple[str, ...],
    assignments: np.ndarray,
    cell_types: tuple[str, ...],
    bins: int = DEFAULT_BINS,
) -> ClusterSummary:
    x = np.asarray(expression, dtype=float)
    labels = np.asarray(assignments)
    types = np.asarray(cell_types)
    if not (x.shape[0] == labels.shape[0] == types.shape[0]):
        raise ValidationError("expression, assignments, and cell_types must align")

    clusters = tuple(int(c) for c in np.unique(labels))
    type_names = tuple(sorted(set(types.tolist())))
    k, d = len(clusters), x.shape[1]

    counts = np.zeros(k, dtype=np.int64)
    medians = np.zeros((k, d))
    means = np.zeros((k, d))
    composition = np.zeros((k, len(type_names)))
    histograms = np.zeros((k, d, bins), dtype=np.int64)
    edges = np.zeros((d, bins + 1))

    for j in range(d):
        edges[j] = _shared_edges(x[:, j], bins)

    for ci, c in enumerate(clusters):
        members = labels == c
        counts[ci] = int(members.sum())
        medians[ci] = np.median(x[members], axis=0)
        means[ci] = x[members].mean(axis=0)
        for ti, t in enumerate(type_names):
            composition[ci, ti] = (types[members] == t).mean()
        for j in range(d):
            histograms[ci, j], _ = np.histogram(x[members, j], bins=edges[j])

    return ClusterSummary(
        clusters=clusters,
        feature_names=tuple(feature_names),
        type_names=type_names,
        counts=counts,
        medians=medians,
        means=means,
        composition=composition,
        histograms=histograms,
        hist_edges=edges,
    )


def top_differential_features(
    summary: ClusterSummary, clusters: list[int], n: int
) -> list[DifferentialFeature]:
    """Features ranked by spread of per-cluster medians over the selection."""
    if n < 1:
        raise ValidationError("n must be >= 1")
    selected = [c for c in clusters]
    if len(set(selected)) < 2:
        raise ValidationError("select at least 2 clusters to compare")
    rows = []
    for c in selected:
        if c not in summary.clusters:
            raise ValidationError(f"cluster {c} not present in summary")
        rows.append(summary.clusters.index(c))

    sub = summary.medians[rows]  # (sel, D)
    spread = sub.max(axis=0) - sub.min(axis=0)
    order = sorted(range(len(summary.feature_names)), key=lambda j: (-spread[j], summary.feature_names[j]))
    out = []
    for j in order[: min(n, len(order))]:
        out.append(
            DifferentialFeature(
                name=summary.feature_names[j],
                spread=float(spread[j]),
                medians={int(c): float(summary.medians[ri, j]) for c, ri in zip(selected, rows)},
            )
        )
    return out


def cluster_composition(assignments: np.ndarray, cell_types) -> dict[int, dict[str, float]]:
    labels = np.asarray(assignments)
    types = np.asarray(cell_types)
    if labels.shape[0] != types.shape[0]:
        raise ValidationError("assignments and cell_types must align")
    out: dict[int, dict[str, float]] = {}
    for c in np.unique(labels):
        members = types[labels == c]
        n = len(members)
        out[int(c)] = {str(t): float((members == t).sum() / n) for t in np.unique(members)}
    return out


def composition_entropy_bits(fractions: dict[str, float]) -> float:
    p = np.array([v for v in fractions.values() if v > 0.0])
    return float(-(p * np.log2(p)).sum())


def feature_histogram(values: np.ndarray, bins: int) -> Histogram:
    """Equal-width bins over the selection's [min, max]; last bin right-inclusive."""
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        raise ValidationError("cannot histogram an empty selection")
    if bins < 1:
        raise ValidationError("bins must be >= 1")
    counts, edges = np.histogram(v, bins=bins)
    return Histogram(edges=edges, counts=counts)


def _shared_edges(values: np.ndarray, bins: int) -> np.ndarray:
    lo, hi = float(values.min()), float(values.max())
    if lo == hi:
        lo, hi = lo - 0.5, hi + 0.5
    return np.linspace(lo, hi, bins + 1)

"""Spatial index and neighborhood queries.

A neighborhood is the set of cells within `radius` of a center cell,
truncated to the `k_max` nearest. The center cell is always a member: the
quantile features and the center-node graph statistics both require it, and
its expression legitimately contributes to local quantiles. Distance ties at
the k_max boundary break by ascending cell index so results are deterministic.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .errors import ValidationError


class SpatialIndex:
    """k-d tree over 2-D cell centers; query results match a brute-force scan."""

    def __init__(self, coords: np.ndarray):
        coords = np.asarray(coords, dtype=float)
        if coords.ndim != 2 or coords.shape[1] != 2:
            raise ValidationError(f"coords must be (N, 2), got {coords.shape}")
        if coords.shape[0] < 1:
            raise ValidationError("spatial index requires at least one point")
        if not np.isfinite(coords).all():
            raise ValidationError("non-finite coordinates")
        self.points = coords
        self._tree = cKDTree(coords)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    def within_radius(self, i: int, radius: float) -> np.ndarray:
        """Indices (including i itself) within Euclidean distance <= radius."""
        hits = self._tree.query_ball_point(self.points[i], r=radius)
        return np.asarray(sorted(hits), dtype=np.int64)

    def knn(self, k: int) -> np.ndarray:
        """(N, k) nearest-neighbor indices for every point, self excluded."""
        k = min(k, self.n - 1)
        if k < 1:
            return np.empty((self.n, 0), dtype=np.int64)
        _, idx = self._tree.query(self.points, k=k + 1)
        idx = np.atleast_2d(idx)
        out = np.empty((self.n, k), dtype=np.int64)
        for i in range(self.n):
            row = idx[i]
            row = row[row != i][:k]
            out[i] = row
        return out


@dataclass(frozen=True)
class Neighborhood:
    center: int
    members: np.ndarray  # sorted cell indices, always contains center
    radius: float
    k_max: int

    @property
    def n(self) -> int:
        return len(self.members)


def build_index(coords: np.ndarray) -> SpatialIndex:
    return SpatialIndex(coords)


def neighborhood_of(index: SpatialIndex, i: int, radius: float, k_max: int) -> Neighborhood:
    """Members = the min(k_max, |within-radius set|) nearest cells to i.

    The center counts against k_max and is always kept; remaining slots go to
    the nearest in-radius cells, ties broken by smaller cell index.
    """
    if not 0 <= i < index.n:
        raise ValidationError(f"cell index {i} out of range [0, {index.n})")
    if radius <= 0:
        raise ValidationError(f"radius must be positive, got {radius}")
    if k_max < 1:
        raise ValidationError(f"k_max must be >= 1, got {k_max}")
    hits = index.within_radius(i, radius)
    members = _select_members(index.points, i, hits, k_max)
    return Neighborhood(center=i, members=members, radius=float(radius), k_max=int(k_max))


def neighborhoods_all(
    index: SpatialIndex, radius: float, k_max: int | None
) -> list[np.ndarray]:
    """Member arrays for every cell at once (k_max=None means radius-only)."""
    if radius <= 0:
        raise ValidationError(f"radius must be positive, got {radius}")
    hit_lists = index._tree.query_ball_point(index.points, r=radius)
    out = []
    for i, hits in enumerate(hit_lists):
        hits = np.asarray(sorted(hits), dtype=np.int64)
        if k_max is None or len(hits) <= k_max:
            out.append(hits)
        else:
            out.append(_select_members(index.points, i, hits, k_max))
    return out


def _select_members(points: np.ndarray, i: int, hits: np.ndarray, k_max: int) -> np.ndarray:
    others = hits[hits != i]
    if len(others) > k_max - 1:
        d = np.linalg.norm(points[others] - points[i], axis=1)
        order = np.lexsort((others, d))  # distance, then index
        others = others[order[: k_max - 1]]
    return np.sort(np.append(others, i)).astype(np.int64)


def spatial_contiguity(assignments: np.ndarray, coords: np.ndarray, knn: int = 10) -> float:
    """Mean fraction of each cell's knn spatial nearest neighbors sharing its label."""
    if knn < 1:
        raise ValidationError(f"knn must be >= 1, got {knn}")
    labels = np.asarray(assignments)
    index = SpatialIndex(np.asarray(coords, dtype=float))
    if labels.shape[0] != index.n:
        raise ValidationError("assignments and coords length mismatch")
    if index.n == 1:
        return 1.0
    neigh = index.knn(knn)
    same = labels[neigh] == labels[:, None]
    return float(same.mean())

"""Seeded k-means on the 2-D embedding.

k-means++ initialization (draws depend only on squared distances, so a rigid
transform of the input reproduces the same choices), Lloyd iterations to an
assignment fixpoint or 300 rounds, and empty-cluster repair by moving the
farthest point out of the highest-inertia cluster. A single k-means++ run can
land a few percent above the reachable optimum, so by default the best of 10
deterministic restarts is kept. Labels are 1-based.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import _frozen
from .embedding import EmbeddingResult
from .errors import ValidationError
from .neighbors import spatial_contiguity  # re-exported; part of this module's surface

__all__ = ["ClusterModel", "kmeans", "spatial_contiguity"]

MAX_LLOYD_ITERATIONS = 300


@dataclass(frozen=True)
class ClusterModel:
    k: int
    assignments: np.ndarray  # (N,) labels in 1..k
    centroids: np.ndarray  # (k, dim)
    inertia: float
    seed: int
    inertia_history: tuple[float, ...]  # one entry per Lloyd iteration

    def __post_init__(self):
        a = np.asarray(self.assignments, dtype=np.int64)
        if a.min() < 1 or a.max() > self.k:
            raise ValidationError("labels out of range")
        object.__setattr__(self, "assignments", _frozen(a))
        object.__setattr__(self, "centroids", _frozen(np.asarray(self.centroids, float)))

    def sizes(self) -> np.ndarray:
        return np.bincount(self.assignments, minlength=self.k + 1)[1:]


def kmeans(e: EmbeddingResult | np.ndarray, k: int, seed: int, n_init: int = 10) -> ClusterModel:
    x = e.coords if isinstance(e, EmbeddingResult) else np.asarray(e, dtype=float)
    n = x.shape[0]
    if not 1 <= k <= n:
        raise ValidationError(f"k must be in [1, {n}], got {k}")
    if n_init < 1:
        raise ValidationError("n_init must be >= 1")

    rng = np.random.default_rng(seed)
    best: tuple[np.ndarray, np.ndarray, list[float]] | None = None
    for _ in range(n_init):
        labels, centroids, history = _lloyd_run(x, k, rng)
        if best is None or history[-1] < best[2][-1]:
            best = (labels, centroids, history)
    labels, centroids, history = best

    return ClusterModel(
        k=k,
        assignments=labels + 1,
        centroids=centroids,
        inertia=history[-1],
        seed=seed,
        inertia_history=tuple(history),
    )


def _lloyd_run(x: np.ndarray, k: int, rng: np.random.Generator):
    n = x.shape[0]
    centroids = _plus_plus_init(x, k, rng)
    labels = np.full(n, -1, dtype=np.int64)
    history: list[float] = []
    for _ in range(MAX_LLOYD_ITERATIONS):
        d2 = _sq_dists(x, centroids)
        new_labels = d2.argmin(axis=1)

        while True:
            empties = _empty_clusters(new_labels, k)
            if not empties:
                break
            empty = empties[0]
            counts = np.bincount(new_labels, minlength=k)
            # only clusters that stay non-empty after losing a point may donate
            donor_sse = np.array(
                [d2[new_labels == j, j].sum() if counts[j] >= 2 else -1.0 for j in range(k)]
            )
            donor = int(donor_sse.argmax())
            members = np.flatnonzero(new_labels == donor)
            farthest = members[int(d2[members, donor].argmax())]
            new_labels[farthest] = empty
            centroids[empty] = x[farthest]
            d2[:, empty] = ((x - centroids[empty]) ** 2).sum(axis=1)

        converged = (new_labels == labels).all()
        labels = new_labels
        centroids = _means(x, labels, k, centroids)
        history.append(float(_sq_dists(x, centroids)[np.arange(n), labels].sum()))
        if converged:
            break

    return labels, centroids, history


def _plus_plus_init(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = x.shape[0]
    centroids = np.empty((k, x.shape[1]))
    first = int(rng.integers(n))
    centroids[0] = x[first]
    closest = ((x - centroids[0]) ** 2).sum(axis=1)
    for j in range(1, k):
        total = closest.sum()
        if total > 0:
            cum = np.cumsum(closest / total)
            pick = int(np.searchsorted(cum, rng.random(), side="right"))
            pick = min(pick, n - 1)
        else:
            pick = int(rng.integers(n))
        centroids[j] = x[pick]
        closest = np.minimum(closest, ((x - centroids[j]) ** 2).sum(axis=1))
    return centroids


def _sq_dists(x: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    return ((x[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)


def _empty_clusters(labels: np.ndarray, k: int):
    present = np.bincount(labels, minlength=k)
    return [int(j) for j in np.flatnonzero(present == 0)]


def _means(x: np.ndarray, labels: np.ndarray, k: int, fallback: np.ndarray) -> np.ndarray:
    out = fallback.copy()
    for j in range(k):
        members = labels == j
        if members.any():
            out[j] = x[members].mean(axis=0)
    return out

"""Nonlinear 2-D embedding of the neighborhood matrix.

The default reducer builds an exact k-nearest-neighbor graph on rows
(brute force is affordable at this domain's N and removes a nondeterminism
source), converts distances to fuzzy affinities with a per-point bandwidth
calibrated so the effective neighbor count is log2(n_neighbors), symmetrizes
by probabilistic union, initializes from the normalized-Laplacian spectrum,
and refines with seeded stochastic gradient attraction/repulsion. Same input
and seed give bit-identical coordinates.

An exact 2-component PCA reducer ("pca") is selectable for deterministic
linear baselines and tests.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
import scipy.sparse as sp
from scipy.optimize import curve_fit
from scipy.sparse.csgraph import connected_components

from .assemble import NeighborhoodMatrix
from .data import Matrix, _frozen
from .errors import ValidationError

REDUCERS = ("umap", "pca")


@dataclass(frozen=True)
class EmbedParams:
    n_neighbors: int = 15
    min_dist: float = 0.1
    epochs: int = 500
    seed: int = 42
    reducer: str = "umap"
    spread: float = 1.0
    negative_sample_rate: int = 5
    repulsion_strength: float = 1.0
    learning_rate: float = 1.0

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class EmbeddingResult:
    coords: np.ndarray  # (N, 2)
    params: EmbedParams
    reducer_id: str

    def __post_init__(self):
        c = np.asarray(self.coords, dtype=float)
        if c.ndim != 2 or c.shape[1] != 2:
            raise ValidationError(f"embedding coords must be (N, 2), got {c.shape}")
        if not np.isfinite(c).all():
            raise ValidationError("embedding produced non-finite coordinates")
        object.__setattr__(self, "coords", _frozen(c))

    @property
    def n(self) -> int:
        return self.coords.shape[0]


def embed(x: NeighborhoodMatrix | Matrix | np.ndarray, params: EmbedParams | None = None) -> EmbeddingResult:
    params = params or EmbedParams()
    arr = _as_array(x)
    if params.reducer == "pca":
        coords = _pca_2d(arr)
    elif params.reducer == "umap":
        if arr.shape[0] < params.n_neighbors + 1:
            raise ValidationError(
                f"need at least n_neighbors+1={params.n_neighbors + 1} rows, got {arr.shape[0]}"
            )
        coords = _umap_embed(arr, params)
    else:
        raise ValidationError(f"unknown reducer {params.reducer!r}; use one of {REDUCERS}")
    return EmbeddingResult(coords=coords.astype(float), params=params, reducer_id=params.reducer)


def _as_array(x) -> np.ndarray:
    if isinstance(x, NeighborhoodMatrix):
        return np.asarray(x.values, dtype=float)
    if isinstance(x, Matrix):
        return np.asarray(x.values, dtype=float)
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 2:
        raise ValidationError("embedding input must be 2-D")
    return arr


def _pca_2d(x: np.ndarray) -> np.ndarray:
    xc = x - x.mean(axis=0)
    u, s, vt = np.linalg.svd(xc, full_matrices=False)
    k = min(2, vt.shape[0])
    scores = np.zeros((x.shape[0], 2))
    for j in range(k):
        col = u[:, j] * s[j]
        lead = int(np.argmax(np.abs(vt[j])))
        if vt[j, lead] < 0:
            col = -col
        scores[:, j] = col
    return scores


def _exact_knn(x: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Sorted k nearest (excluding self); distance ties break by index."""
    n = x.shape[0]
    sq = (x * x).sum(axis=1)
    idx = np.empty((n, k), dtype=np.int64)
    dist = np.empty((n, k))
    chunk = max(1, int(4_000_000 // max(n, 1)))
    for s in range(0, n, chunk):
        e = min(n, s + chunk)
        d2 = sq[s:e, None] + sq[None, :] - 2.0 * (x[s:e] @ x.T)
        np.maximum(d2, 0.0, out=d2)
        order = np.argsort(d2, axis=1, kind="stable")
        for r in range(e - s):
            row = order[r]
            row = row[row != s + r][:k]
            idx[s + r] = row
            dist[s + r] = np.sqrt(d2[r, row])
    return idx, dist


def _smooth_knn(dist: np.ndarray, n_neighbors: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-point bandwidth sigma and connectivity offset rho.

    sigma solves sum_j exp(-max(0, d_ij - rho_i)/sigma_i) = log2(n_neighbors)
    by 64 bisection steps; rho is the smallest positive neighbor distance.
    """
    n, k = dist.shape
    target = np.log2(n_neighbors)
    positive = dist > 0.0
    has_pos = positive.any(axis=1)
    first_pos = np.where(has_pos, positive.argmax(axis=1), 0)
    rho = np.where(has_pos, dist[np.arange(n), first_pos], 0.0)

    lo = np.zeros(n)
    hi = np.full(n, np.inf)
    mid = np.ones(n)
    for _ in range(64):
        psum = np.exp(-np.maximum(dist - rho[:, None], 0.0) / mid[:, None]).sum(axis=1)
        err = psum - target
        done = np.abs(err) < 1e-5
        shrink = ~done & (err > 0)
        grow = ~done & (err <= 0)
        hi = np.where(shrink, mid, hi)
        lo = np.where(grow, mid, lo)
        nxt = np.where(np.isinf(hi), mid * 2.0, (lo + hi) / 2.0)
        mid = np.where(done, mid, nxt)

    mean_d = dist.mean(axis=1)
    floor = 1e-3 * np.where(mean_d > 0, mean_d, 1.0)
    return np.maximum(mid, floor), rho


def _fuzzy_graph(x: np.ndarray, n_neighbors: int) -> sp.csr_matrix:
    n = x.shape[0]
    idx, dist = _exact_knn(x, min(n_neighbors, n - 1))
    sigma, rho = _smooth_knn(dist, n_neighbors)
    w = np.exp(-np.maximum(dist - rho[:, None], 0.0) / sigma[:, None])
    rows = np.repeat(np.arange(n), idx.shape[1])
    graph = sp.coo_matrix((w.ravel(), (rows, idx.ravel())), shape=(n, n)).tocsr()
    transpose = graph.T.tocsr()
    prod = graph.multiply(transpose)
    return (graph + transpose - prod).tocsr()


def _component_spectral(w: sp.csr_matrix, seed: int) -> np.ndarray:
    size = w.shape[0]
    deg = np.asarray(w.sum(axis=1)).ravel()
    deg[deg == 0.0] = 1.0
    dinv = 1.0 / np.sqrt(deg)
    lap = sp.identity(size, format="csr") - w.multiply(dinv[:, None]).multiply(dinv[None, :])
    if size <= 2048:
        vals, vecs = np.linalg.eigh(np.asarray(lap.todense()))
    else:
        from scipy.sparse.linalg import eigsh

        try:
            vals, vecs = eigsh(
                lap.tocsc().tocsr(),
                k=3,
                which="SM",
                v0=np.full(size, 1.0 / np.sqrt(size)),
                tol=1e-4,
                maxiter=size * 5,
                ncv=min(size, 32),
            )
        except Exception:
            rng = np.random.default_rng(seed)
            return rng.uniform(-1.0, 1.0, size=(size, 2))
    order = np.argsort(vals)
    take = [order[j] for j in range(1, min(3, len(order)))]
    comps = vecs[:, take]
    if comps.shape[1] < 2:
        comps = np.column_stack([comps[:, 0], np.zeros(size)])
    for j in range(2):
        lead = int(np.argmax(np.abs(comps[:, j])))
        if comps[lead, j] < 0:
            comps[:, j] = -comps[:, j]
    maxabs = np.abs(comps).max()
    if maxabs > 0:
        comps = comps / maxabs
    return comps


def _spectral_init(graph: sp.csr_matrix, seed: int) -> np.ndarray:
    n = graph.shape[0]
    n_comp, labels = connected_components(graph, directed=False)
    emb = np.zeros((n, 2))
    grid = int(np.ceil(np.sqrt(n_comp)))
    for ci in range(n_comp):
        nodes = np.flatnonzero(labels == ci)
        offset = np.array([3.0 * (ci % grid), 3.0 * (ci // grid)])
        if len(nodes) == 1:
            emb[nodes[0]] = offset
            continue
        sub = graph[nodes][:, nodes].tocsr()
        emb[nodes] = _component_spectral(sub, seed) + offset
    maxabs = np.abs(emb).max()
    if maxabs > 0:
        emb = emb * (10.0 / maxabs)
    rng = np.random.default_rng(seed)
    return (emb + rng.normal(scale=1e-4, size=emb.shape)).astype(np.float32)


def _find_ab(spread: float, min_dist: float) -> tuple[float, float]:
    def curve(x, a, b):
        return 1.0 / (1.0 + a * x ** (2.0 * b))

    xv = np.linspace(0.0, spread * 3.0, 300)
    yv = np.zeros_like(xv)
    yv[xv < min_dist] = 1.0
    tail = xv >= min_dist
    yv[tail] = np.exp(-(xv[tail] - min_dist) / spread)
    (a, b), _ = curve_fit(curve, xv, yv)
    return float(a), float(b)


def _make_epochs_per_sample(weights: np.ndarray, n_epochs: int) -> np.ndarray:
    out = np.full(weights.shape[0], -1.0)
    n_samples = n_epochs * (weights / weights.max())
    out[n_samples > 0] = float(n_epochs) / n_samples[n_samples > 0]
    return out


def _umap_embed(x: np.ndarray, params: EmbedParams) -> np.ndarray:
    from ._layout import optimize_layout

    graph = _fuzzy_graph(x, params.n_neighbors)

    # edges too weak to be sampled even once are dropped, as is standard
    graph.data[graph.data < graph.data.max() / params.epochs] = 0.0
    graph.eliminate_zeros()

    emb = _spectral_init(graph, params.seed)

    coo = graph.tocoo()
    epochs_per_sample = _make_epochs_per_sample(coo.data, params.epochs)
    a, b = _find_ab(params.spread, params.min_dist)
    rng = np.random.default_rng(params.seed)
    rng_state = rng.integers(1, 2**31 - 1, size=3).astype(np.int64)

    optimize_layout(
        emb,
        coo.row.astype(np.int32),
        coo.col.astype(np.int32),
        params.epochs,
        graph.shape[0],
        epochs_per_sample,
        a,
        b,
        rng_state,
        float(params.repulsion_strength),
        float(params.learning_rate),
        int(params.negative_sample_rate),
    )
    return np.asarray(emb, dtype=float)

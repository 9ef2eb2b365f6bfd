"""Geometric neighborhood graphs and the registry of network statistics.

Each cell's neighborhood induces a geometric graph: members are nodes, and an
undirected edge links two members whose centers are within `edge_threshold`
(<= comparison, so exact-threshold pairs ARE edges). Statistics are evaluated
at the CENTER node unless marked graph-level; an aggregate="mean" hook
averages each statistic over all nodes instead, for comparison runs.

Disconnected graphs are the norm at tissue-scale thresholds, so every
statistic commits to an explicit finite convention (documented per entry
below); no statistic ever returns NaN or infinity.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Matrix
from .errors import ValidationError
from .neighbors import Neighborhood, SpatialIndex, neighborhoods_all
from .quantiles import FeatureBlock


@dataclass(frozen=True)
class NeighborhoodGraph:
    """Simple undirected graph over one neighborhood's member cells."""

    nodes: np.ndarray  # original cell indices, sorted
    center_local: int  # position of the center cell within `nodes`
    adj: np.ndarray  # (n, n) bool, symmetric, zero diagonal
    edge_threshold: float

    def __post_init__(self):
        a = np.asarray(self.adj, dtype=bool)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValidationError("adjacency must be square")
        if a.shape[0] != len(self.nodes):
            raise ValidationError("adjacency size does not match node count")
        if np.diag(a).any():
            raise ValidationError("self-loops are not allowed")
        if not (a == a.T).all():
            raise ValidationError("adjacency must be symmetric")
        if not 0 <= self.center_local < len(self.nodes):
            raise ValidationError("center position out of range")
        object.__setattr__(self, "adj", a)

    @property
    def n(self) -> int:
        return len(self.nodes)

    @property
    def n_edges(self) -> int:
        return int(self.adj.sum()) // 2


def build_graph(nb: Neighborhood, coords: np.ndarray, edge_threshold: float) -> NeighborhoodGraph:
    """Link members whose centers are within edge_threshold of one another."""
    if edge_threshold <= 0:
        raise ValidationError(f"edge_threshold must be positive, got {edge_threshold}")
    coords = np.asarray(coords, dtype=float)
    pts = coords[nb.members]
    diff = pts[:, None, :] - pts[None, :, :]
    dist = np.sqrt((diff * diff).sum(axis=2))
    adj = dist <= edge_threshold
    np.fill_diagonal(adj, False)
    center_local = int(np.searchsorted(nb.members, nb.center))
    return NeighborhoodGraph(
        nodes=nb.members,
        center_local=center_local,
        adj=adj,
        edge_threshold=float(edge_threshold),
    )


@dataclass(frozen=True)
class StatEntry:
    id: int
    key: str
    label: str
    graph_level: bool = False


#: Registry order and conventions. "comp" is the center's connected component,
#: d(.) geodesic distance, reachable = comp minus the center itself.
#:
#:  1 degree          center-node degree
#:  2 node_count      |V| (graph-level)
#:  3 betweenness     sum over unordered pairs s,t != c of the fraction of
#:                    shortest s-t paths through c
#:  4 closeness       (|comp|-1) / sum of d(c, j) over comp; 0 if isolated
#:  5 eigenvector     center entry of the principal adjacency eigenvector of
#:                    comp (power iteration, L2-normalized); 0 if isolated
#:  6 eccentricity    max d(c, j) within comp; 0 if isolated
#:  7 subgraph        (e^A)_cc; 1 if isolated
#:  8 load            unit-packet flow through c, split equally among
#:                    shortest-path successors toward each target, summed over
#:                    ordered pairs and halved (pair-counting as betweenness)
#:  9 gil_schmidt     |reachable| / sum d(c, j); 0 if none reachable
#: 10 information     harmonic-mean resistance on comp: |comp| / sum of
#:                    effective resistances from c; 0 if isolated
#: 11 stress          count of shortest paths through c (unordered pairs)
#: 12 average_distance  mean d(c, j) over reachable; 0 if none
#: 13 barycenter      1 / sum d(c, j) over reachable; 0 if none
#: 14 latora_closeness  sum of 1/d(c, j); unreachable contribute 0
#: 15 residual_closeness  sum of 2^(-d(c, j)); unreachable contribute 0
#: 16 communicability_betweenness  walk betweenness via matrix exponential,
#:                    normalized by (n-1)(n-2); 0 for n < 3; pairs with no
#:                    walk contribute 0
#: 17 cross_clique    number of maximal cliques containing c ({c} counts when
#:                    isolated)
#: 18 decay           sum of delta^d(c, j), unreachable contribute 0
#: 19 diffusion_degree  deg(c) + sum of neighbor degrees
#: 20 radiality       sum over comp of (diam(comp)+1-d(c, j)) / (|comp|-1);
#:                    0 for a singleton
#: 21 geodesic_kpath  |{j != c : d(c, j) <= k}|
#: 22 laplacian       Laplacian-energy drop when c is removed
#:                    (= deg^2 + deg + 2*sum of neighbor degrees)
#: 23 leverage        mean over neighbors of (deg_c-deg_j)/(deg_c+deg_j);
#:                    0 if degree 0
#: 24 lin             (|reachable|+1)^2 / sum d(c, j); 0 for a singleton
#: 25 lobby           largest L with at least L neighbors of degree >= L
#: 26 markov          inverse mean first-passage time to c for the random
#:                    walk on comp; 0 for a singleton
#: 27 max_neighborhood_component  largest connected component of the
#:                    subgraph induced by N(c); 0 if degree 0
#: 28 semi_local      sum over w in N(c), u in N(w) of |{x: d(u, x) <= 2}|
#: 29 topological_coefficient  mean over nodes sharing >= 1 neighbor with c
#:                    of (shared-neighbor count + 1 if adjacent), divided by
#:                    deg(c); 0 if degree < 2 or no such node
_ENTRIES = [
    StatEntry(1, "degree", "Degree"),
    StatEntry(2, "node_count", "Number of Nodes", graph_level=True),
    StatEntry(3, "betweenness", "Betweenness"),
    StatEntry(4, "closeness", "Closeness"),
    StatEntry(5, "eigenvector", "Eigenvector"),
    StatEntry(6, "eccentricity", "Eccentricity"),
    StatEntry(7, "subgraph", "Subgraph"),
    StatEntry(8, "load", "Load"),
    StatEntry(9, "gil_schmidt", "Gil-Schmidt Power Index"),
    StatEntry(10, "information", "Information"),
    StatEntry(11, "stress", "Stress"),
    StatEntry(12, "average_distance", "Average Distance"),
    StatEntry(13, "barycenter", "Barycenter"),
    StatEntry(14, "latora_closeness", "Latora Closeness"),
    StatEntry(15, "residual_closeness", "Residual Closeness"),
    StatEntry(16, "communicability_betweenness", "Communicability Betweenness"),
    StatEntry(17, "cross_clique", "Cross-clique Connectivity"),
    StatEntry(18, "decay", "Decay"),
    StatEntry(19, "diffusion_degree", "Diffusion Degree"),
    StatEntry(20, "radiality", "Radiality"),
    StatEntry(21, "geodesic_kpath", "Geodesic k-path"),
    StatEntry(22, "laplacian", "Laplacian"),
    StatEntry(23, "leverage", "Leverage"),
    StatEntry(24, "lin", "Lin"),
    StatEntry(25, "lobby", "Lobby"),
    StatEntry(26, "markov", "Markov"),
    StatEntry(27, "max_neighborhood_component", "Maximum Neighborhood Component"),
    StatEntry(28, "semi_local", "Semi-local"),
    StatEntry(29, "topological_coefficient", "Topological Coefficient"),
]


@dataclass(frozen=True)
class StatRegistry:
    entries: tuple[StatEntry, ...]
    decay_delta: float = 0.5
    kpath_k: int = 3

    def __post_init__(self):
        keys = [e.key for e in self.entries]
        if len(set(keys)) != len(keys):
            raise ValidationError("registry keys must be unique")
        if len(keys) < 1:
            raise ValidationError("registry must contain at least one statistic")

    @property
    def m(self) -> int:
        return len(self.entries)

    def keys(self) -> tuple[str, ...]:
        return tuple(e.key for e in self.entries)


def default_registry(
    decay_delta: float = 0.5, kpath_k: int = 3, include: list[str] | None = None
) -> StatRegistry:
    """The 29-statistic default, optionally restricted to named entries."""
    entries = _ENTRIES if include is None else [e for e in _ENTRIES if e.key in set(include)]
    if include is not None and len(entries) != len(set(include)):
        unknown = set(include) - {e.key for e in _ENTRIES}
        raise ValidationError(f"unknown statistics: {sorted(unknown)}")
    return StatRegistry(tuple(entries), decay_delta=decay_delta, kpath_k=kpath_k)


def compute_network_features(
    g: NeighborhoodGraph, registry: StatRegistry, aggregate: str = "center"
) -> np.ndarray:
    """Evaluate the registry on one graph; returns M finite reals in registry order."""
    if g.n < 1:
        raise ValidationError("graph must have at least one node")
    if aggregate == "center":
        ctx = _GraphContext(g.adj)
        return np.array([_evaluate(e, ctx, g.center_local, registry) for e in registry.entries])
    if aggregate == "mean":
        ctx = _GraphContext(g.adj)
        rows = np.array(
            [[_evaluate(e, ctx, v, registry) for e in registry.entries] for v in range(g.n)]
        )
        return rows.mean(axis=0)
    raise ValidationError(f"unknown aggregate mode: {aggregate!r}")


def network_matrix(
    coords: np.ndarray,
    index: SpatialIndex,
    radius: float,
    k_max: int | None,
    edge_threshold: float,
    registry: StatRegistry | None = None,
    aggregate: str = "center",
) -> FeatureBlock:
    """Network statistic block over all cells' neighborhood graphs."""
    registry = registry or default_registry()
    members = neighborhoods_all(index, radius, k_max)
    out = np.empty((index.n, registry.m))
    for i, m in enumerate(members):
        nb = Neighborhood(center=i, members=m, radius=float(radius), k_max=k_max or len(m))
        graph = build_graph(nb, coords, edge_threshold)
        out[i] = compute_network_features(graph, registry, aggregate=aggregate)
    return FeatureBlock(
        name="network",
        matrix=Matrix(out, registry.keys()),
        provenance={
            "featurization": "neighborhood-network-statistics",
            "radius": float(radius),
            "k_max": None if k_max is None else int(k_max),
            "edge_threshold": float(edge_threshold),
            "decay_delta": registry.decay_delta,
            "kpath_k": registry.kpath_k,
            "aggregate": aggregate,
        },
    )


class _GraphContext:
    """Shared intermediates for one graph: degrees, all-pairs geodesics,
    shortest-path counts, and lazily cached eigen pieces."""

    def __init__(self, adj: np.ndarray):
        self.adj = adj
        self.a = adj.astype(float)
        self.n = adj.shape[0]
        self.deg = adj.sum(axis=1).astype(float)
        self.dist, self.sigma = _all_pairs_counts(self.a)
        self._expm = None
        self._load = None

    def component_of(self, c: int) -> np.ndarray:
        return np.flatnonzero(np.isfinite(self.dist[c]))

    def expm(self) -> np.ndarray:
        if self._expm is None:
            self._expm = _expm_sym(self.a)
        return self._expm

    def load_all(self) -> np.ndarray:
        if self._load is None:
            self._load = _load_centrality_all(self.a, self.dist)
        return self._load


def _all_pairs_counts(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Geodesic distances (inf if unreachable) and shortest-path counts."""
    n = a.shape[0]
    dist = np.full((n, n), np.inf)
    sigma = np.zeros((n, n))
    for s in range(n):
        dist[s, s] = 0.0
        sigma[s, s] = 1.0
        frontier = np.zeros(n, dtype=bool)
        frontier[s] = True
        level = 0
        while True:
            contrib = (sigma[s] * frontier) @ a
            newly = (contrib > 0) & np.isinf(dist[s])
            if not newly.any():
                break
            level += 1
            dist[s, newly] = level
            sigma[s, newly] = contrib[newly]
            frontier = newly
    return dist, sigma


def _expm_sym(a: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(a)
    return (v * np.exp(w)) @ v.T


def _load_centrality_all(a: np.ndarray, dist: np.ndarray) -> np.ndarray:
    """Per-node load: source-rooted equal-split accumulation, halved."""
    n = a.shape[0]
    load = np.zeros(n)
    for s in range(n):
        d = dist[s]
        finite = np.isfinite(d)
        max_level = int(d[finite].max())
        if max_level == 0:
            continue
        amount = finite.astype(float)
        amount[s] = 0.0
        for level in range(max_level, 0, -1):
            cur = np.flatnonzero(finite & (d == level))
            prev = np.flatnonzero(finite & (d == level - 1))
            sub = a[np.ix_(cur, prev)]
            splits = sub.sum(axis=1)
            load_to_prev = (amount[cur] / splits) @ sub
            amount[prev] += load_to_prev
        through = amount - finite.astype(float)
        through[s] = 0.0
        load += through
    return load / 2.0


def _evaluate(entry: StatEntry, ctx: _GraphContext, c: int, registry: StatRegistry) -> float:
    fn = _STATS[entry.key]
    if entry.key == "decay":
        return fn(ctx, c, registry.decay_delta)
    if entry.key == "geodesic_kpath":
        return fn(ctx, c, registry.kpath_k)
    return fn(ctx, c)


def _stat_degree(ctx, c):
    return float(ctx.deg[c])


def _stat_node_count(ctx, c):
    return float(ctx.n)


def _pair_mask(ctx, c):
    """Upper-triangle (s, t) pairs with s != c != t and a c-through geodesic."""
    d = ctx.dist
    on_path = d[:, c][:, None] + d[c, :][None, :] == d
    on_path &= np.isfinite(d)
    on_path[c, :] = False
    on_path[:, c] = False
    np.fill_diagonal(on_path, False)
    return np.triu(on_path)


def _stat_betweenness(ctx, c):
    mask = _pair_mask(ctx, c)
    if not mask.any():
        return 0.0
    through = ctx.sigma[:, c][:, None] * ctx.sigma[c, :][None, :]
    with np.errstate(invalid="ignore", divide="ignore"):
        frac = np.where(mask, through / ctx.sigma, 0.0)
    return float(frac[mask].sum())


def _stat_stress(ctx, c):
    mask = _pair_mask(ctx, c)
    through = ctx.sigma[:, c][:, None] * ctx.sigma[c, :][None, :]
    return float(through[mask].sum())


def _stat_closeness(ctx, c):
    d = ctx.dist[c]
    reach = np.isfinite(d) & (np.arange(ctx.n) != c)
    if not reach.any():
        return 0.0
    return float(reach.sum() / d[reach].sum())


def _stat_gil_schmidt(ctx, c):
    return _stat_closeness(ctx, c)


def _stat_eigenvector(ctx, c):
    comp = ctx.component_of(c)
    if len(comp) == 1:
        return 0.0
    sub = ctx.a[np.ix_(comp, comp)]
    x = np.full(len(comp), 1.0 / np.sqrt(len(comp)))
    shifted = sub + np.eye(len(comp))  # keeps the Perron pair dominant on bipartite graphs
    for _ in range(10000):
        nxt = shifted @ x
        nxt /= np.linalg.norm(nxt)
        if np.abs(nxt - x).max() < 1e-13:
            x = nxt
            break
        x = nxt
    pos = int(np.searchsorted(comp, c))
    return float(abs(x[pos]))


def _stat_eccentricity(ctx, c):
    d = ctx.dist[c]
    return float(d[np.isfinite(d)].max())


def _stat_subgraph(ctx, c):
    return float(ctx.expm()[c, c])


def _stat_load(ctx, c):
    return float(ctx.load_all()[c])


def _stat_information(ctx, c):
    comp = ctx.component_of(c)
    n2 = len(comp)
    if n2 == 1:
        return 0.0
    sub = ctx.a[np.ix_(comp, comp)]
    lap = np.diag(sub.sum(axis=1)) - sub
    cmat = np.linalg.inv(lap + np.ones((n2, n2)))
    pos = int(np.searchsorted(comp, c))
    diag = np.diag(cmat)
    resistances = cmat[pos, pos] + diag - 2.0 * cmat[pos]
    return float(n2 / resistances.sum())


def _stat_average_distance(ctx, c):
    d = ctx.dist[c]
    reach = np.isfinite(d) & (np.arange(ctx.n) != c)
    if not reach.any():
        return 0.0
    return float(d[reach].mean())


def _stat_barycenter(ctx, c):
    d = ctx.dist[c]
    reach = np.isfinite(d) & (np.arange(ctx.n) != c)
    if not reach.any():
        return 0.0
    return float(1.0 / d[reach].sum())


def _stat_latora(ctx, c):
    d = ctx.dist[c]
    reach = np.isfinite(d) & (np.arange(ctx.n) != c)
    return float((1.0 / d[reach]).sum()) if reach.any() else 0.0


def _stat_residual(ctx, c):
    d = ctx.dist[c]
    reach = np.isfinite(d) & (np.arange(ctx.n) != c)
    return float(np.power(2.0, -d[reach]).sum()) if reach.any() else 0.0


def _stat_communicability(ctx, c):
    n = ctx.n
    if n < 3:
        return 0.0
    e_full = ctx.expm()
    a_del = ctx.a.copy()
    a_del[c, :] = 0.0
    a_del[:, c] = 0.0
    e_del = _expm_sym(a_del)
    diff = e_full - e_del
    # pairs in different components have no walks at all; the eigh-based
    # exponential leaves float dust there, so mask by actual connectivity
    connected = np.isfinite(ctx.dist)
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.where(connected & (e_full > 0.0), diff / e_full, 0.0)
    ratio[c, :] = 0.0
    ratio[:, c] = 0.0
    np.fill_diagonal(ratio, 0.0)
    return float(ratio.sum() / ((n - 1) ** 2 - (n - 1)))


def _stat_cross_clique(ctx, c):
    neigh = np.flatnonzero(ctx.adj[c])
    adjsets = {int(u): set(np.flatnonzero(ctx.adj[u])) & set(neigh.tolist()) for u in neigh}
    count = 0

    def bron_kerbosch(r, p, x):
        nonlocal count
        if not p and not x:
            count += 1
            return
        pivot_pool = p | x
        pivot = max(pivot_pool, key=lambda u: len(adjsets[u] & p))
        for v in list(p - adjsets[pivot]):
            bron_kerbosch(r | {v}, p & adjsets[v], x & adjsets[v])
            p.remove(v)
            x.add(v)

    bron_kerbosch(set(), set(int(u) for u in neigh), set())
    return float(count)


def _stat_decay(ctx, c, delta):
    d = ctx.dist[c]
    reach = np.isfinite(d) & (np.arange(ctx.n) != c)
    return float(np.power(delta, d[reach]).sum()) if reach.any() else 0.0


def _stat_diffusion(ctx, c):
    return float(ctx.deg[c] + ctx.deg[ctx.adj[c]].sum())


def _stat_radiality(ctx, c):
    comp = ctx.component_of(c)
    n2 = len(comp)
    if n2 == 1:
        return 0.0
    sub_d = ctx.dist[np.ix_(comp, comp)]
    diam = float(sub_d[np.isfinite(sub_d)].max())
    d = ctx.dist[c][comp]
    d = d[d > 0]
    return float(((diam + 1.0 - d) / (n2 - 1)).sum())


def _stat_kpath(ctx, c, k):
    d = ctx.dist[c]
    reach = np.isfinite(d) & (d > 0)
    return float((d[reach] <= k).sum())


def _stat_laplacian(ctx, c):
    dc = ctx.deg[c]
    return float(dc * dc + dc + 2.0 * ctx.deg[ctx.adj[c]].sum())


def _stat_leverage(ctx, c):
    if ctx.deg[c] == 0:
        return 0.0
    dn = ctx.deg[ctx.adj[c]]
    return float(((ctx.deg[c] - dn) / (ctx.deg[c] + dn)).mean())


def _stat_lin(ctx, c):
    d = ctx.dist[c]
    reach = np.isfinite(d) & (np.arange(ctx.n) != c)
    r = int(reach.sum())
    if r == 0:
        return 0.0
    return float((r + 1) ** 2 / d[reach].sum())


def _stat_lobby(ctx, c):
    dn = np.sort(ctx.deg[ctx.adj[c]])[::-1]
    lobby = 0
    for i, dv in enumerate(dn, start=1):
        if dv >= i:
            lobby = i
        else:
            break
    return float(lobby)


def _stat_markov(ctx, c):
    comp = ctx.component_of(c)
    n2 = len(comp)
    if n2 == 1:
        return 0.0
    sub = ctx.a[np.ix_(comp, comp)]
    p = sub / sub.sum(axis=1, keepdims=True)
    pos = int(np.searchsorted(comp, c))
    keep = np.arange(n2) != pos
    q = p[np.ix_(keep, keep)]
    m = np.linalg.solve(np.eye(n2 - 1) - q, np.ones(n2 - 1))
    return float((n2 - 1) / m.sum())


def _stat_mnc(ctx, c):
    neigh = np.flatnonzero(ctx.adj[c])
    if len(neigh) == 0:
        return 0.0
    sub = ctx.adj[np.ix_(neigh, neigh)]
    seen = np.zeros(len(neigh), dtype=bool)
    best = 0
    for start in range(len(neigh)):
        if seen[start]:
            continue
        frontier = {start}
        size = 0
        while frontier:
            v = frontier.pop()
            if seen[v]:
                continue
            seen[v] = True
            size += 1
            frontier.update(np.flatnonzero(sub[v] & ~seen).tolist())
        best = max(best, size)
    return float(best)


def _stat_semi_local(ctx, c):
    within2 = (np.isfinite(ctx.dist) & (ctx.dist > 0) & (ctx.dist <= 2)).sum(axis=1)
    q = np.array([within2[ctx.adj[w]].sum() for w in range(ctx.n)])
    return float(q[ctx.adj[c]].sum())


def _stat_topological(ctx, c):
    if ctx.deg[c] < 2:
        return 0.0
    shared = ctx.a @ ctx.a
    others = (np.arange(ctx.n) != c) & (shared[c] >= 1)
    if not others.any():
        return 0.0
    overlap = shared[c, others] + ctx.adj[c, others]
    return float(overlap.mean() / ctx.deg[c])


_STATS = {
    "degree": _stat_degree,
    "node_count": _stat_node_count,
    "betweenness": _stat_betweenness,
    "closeness": _stat_closeness,
    "eigenvector": _stat_eigenvector,
    "eccentricity": _stat_eccentricity,
    "subgraph": _stat_subgraph,
    "load": _stat_load,
    "gil_schmidt": _stat_gil_schmidt,
    "information": _stat_information,
    "stress": _stat_stress,
    "average_distance": _stat_average_distance,
    "barycenter": _stat_barycenter,
    "latora_closeness": _stat_latora,
    "residual_closeness": _stat_residual,
    "communicability_betweenness": _stat_communicability,
    "cross_clique": _stat_cross_clique,
    "decay": _stat_decay,
    "diffusion_degree": _stat_diffusion,
    "radiality": _stat_radiality,
    "geodesic_kpath": _stat_kpath,
    "laplacian": _stat_laplacian,
    "leverage": _stat_leverage,
    "lin": _stat_lin,
    "lobby": _stat_lobby,
    "markov": _stat_markov,
    "max_neighborhood_component": _stat_mnc,
    "semi_local": _stat_semi_local,
    "topological_coefficient": _stat_topological,
}

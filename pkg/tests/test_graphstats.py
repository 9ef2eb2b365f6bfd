import itertools

import numpy as np
import pytest

from microenv import (
    ValidationError,
    build_graph,
    build_index,
    compute_network_features,
    default_registry,
    neighborhood_of,
    network_matrix,
)
from microenv.graphstats import NeighborhoodGraph

from oracles import ORACLES, floyd_warshall

REGISTRY = default_registry()
KEY_INDEX = {e.key: i for i, e in enumerate(REGISTRY.entries)}


def graph_from_adj(adj, center=0):
    adj = np.asarray(adj, dtype=bool)
    return NeighborhoodGraph(
        nodes=np.arange(adj.shape[0]),
        center_local=center,
        adj=adj,
        edge_threshold=1.0,
    )


def adj_from_edges(n, edges):
    adj = np.zeros((n, n), dtype=bool)
    for a, b in edges:
        adj[a, b] = adj[b, a] = True
    return adj


def stat(adj, center, key):
    values = compute_network_features(graph_from_adj(adj, center), REGISTRY)
    return values[KEY_INDEX[key]]


def assert_matches_oracles(adj, center):
    values = compute_network_features(graph_from_adj(adj, center), REGISTRY)
    d = floyd_warshall(adj)
    for key, (oracle, tol) in ORACLES.items():
        want = oracle(adj, d, center)
        got = values[KEY_INDEX[key]]
        if tol == 0.0:
            assert got == want, f"{key}: got {got}, want {want}"
        else:
            assert got == pytest.approx(want, abs=tol), f"{key}: got {got}, want {want}"


# ---------------------------------------------------------------- build_graph


def test_triangle_from_mutually_close_cells():
    coords = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, 0.8]])
    nb = neighborhood_of(build_index(coords), 0, radius=5.0, k_max=5)
    g = build_graph(nb, coords, edge_threshold=1.5)
    assert g.n_edges == 3


def test_exact_threshold_spacing_gives_path_graph():
    coords = np.array([[0.0, 0.0], [30.0, 0.0], [60.0, 0.0], [90.0, 0.0]])
    nb = neighborhood_of(build_index(coords), 1, radius=1000.0, k_max=10)
    g = build_graph(nb, coords, edge_threshold=30.0)
    assert g.n_edges == 3  # ties at exactly the threshold ARE edges
    degrees = g.adj.sum(axis=1).tolist()
    assert sorted(degrees) == [1, 1, 2, 2]


def test_random_neighborhood_edges_match_pairwise_scan():
    rng = np.random.default_rng(0)
    coords = rng.uniform(0, 100, size=(120, 2))
    index = build_index(coords)
    nb = neighborhood_of(index, 7, radius=40.0, k_max=40)
    g = build_graph(nb, coords, edge_threshold=15.0)
    for a, b in itertools.combinations(range(nb.n), 2):
        expected = np.linalg.norm(coords[nb.members[a]] - coords[nb.members[b]]) <= 15.0
        assert g.adj[a, b] == expected


def test_graph_invariants_enforced():
    with pytest.raises(ValidationError):
        NeighborhoodGraph(
            nodes=np.arange(2), center_local=0, adj=np.array([[True, True], [True, False]]),
            edge_threshold=1.0,
        )


# ------------------------------------------------------- fixed small examples


def test_isolated_node_floors():
    adj = np.zeros((1, 1), dtype=bool)
    values = compute_network_features(graph_from_adj(adj), REGISTRY)
    by_key = dict(zip(REGISTRY.keys(), values))
    assert by_key["degree"] == 0.0
    assert by_key["node_count"] == 1.0
    assert by_key["betweenness"] == 0.0
    assert by_key["latora_closeness"] == 0.0
    assert by_key["eigenvector"] == 0.0
    assert by_key["eccentricity"] == 0.0
    assert by_key["closeness"] == 0.0
    assert by_key["subgraph"] == pytest.approx(1.0)  # e^0
    assert by_key["cross_clique"] == 1.0  # {center} itself
    assert np.isfinite(values).all()


def test_star_hub_betweenness_and_degree():
    adj = adj_from_edges(5, [(0, 1), (0, 2), (0, 3), (0, 4)])
    assert stat(adj, 0, "betweenness") == pytest.approx(6.0)  # all 6 leaf pairs
    assert stat(adj, 0, "degree") == 4.0
    assert stat(adj, 0, "stress") == 6.0
    assert stat(adj, 0, "load") == pytest.approx(6.0)


def test_path3_middle_closeness_and_betweenness():
    adj = adj_from_edges(3, [(0, 1), (1, 2)])
    assert stat(adj, 1, "closeness") == pytest.approx(1.0)  # 2/(1+1)
    assert stat(adj, 1, "betweenness") == pytest.approx(1.0)


def test_complete_graph_invariants():
    for n in (3, 5, 7):
        adj = adj_from_edges(n, itertools.combinations(range(n), 2))
        for c in range(n):
            assert stat(adj, c, "betweenness") == 0.0
            assert stat(adj, c, "stress") == 0.0
            assert stat(adj, c, "degree") == n - 1
            assert stat(adj, c, "eccentricity") == 1.0
            assert stat(adj, c, "closeness") == pytest.approx(1.0)


def test_two_triangles_disconnected():
    adj = adj_from_edges(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)])
    values = compute_network_features(graph_from_adj(adj, 0), REGISTRY)
    assert np.isfinite(values).all()
    by_key = dict(zip(REGISTRY.keys(), values))
    assert by_key["node_count"] == 6.0
    assert by_key["closeness"] == pytest.approx(1.0)  # within its component
    assert by_key["eccentricity"] == 1.0
    assert_matches_oracles(adj, 0)


# ----------------------------------------------------------------- properties


def test_isomorphism_invariance():
    rng = np.random.default_rng(1)
    pts = rng.uniform(0, 1, size=(12, 2))
    adj = np.linalg.norm(pts[:, None] - pts[None, :], axis=2) <= 0.35
    np.fill_diagonal(adj, False)
    base = compute_network_features(graph_from_adj(adj, 3), REGISTRY)
    for seed in range(5):
        perm = np.random.default_rng(seed).permutation(12)
        padj = adj[np.ix_(perm, perm)]
        center = int(np.flatnonzero(perm == 3)[0])
        got = compute_network_features(graph_from_adj(padj, center), REGISTRY)
        np.testing.assert_allclose(got, base, atol=1e-8)


def test_adding_edge_monotone_stats():
    rng = np.random.default_rng(2)
    for _ in range(20):
        n = int(rng.integers(4, 10))
        pts = rng.uniform(0, 1, size=(n, 2))
        adj = np.linalg.norm(pts[:, None] - pts[None, :], axis=2) <= 0.4
        np.fill_diagonal(adj, False)
        missing = [(a, b) for a, b in itertools.combinations(range(n), 2) if not adj[a, b]]
        if not missing:
            continue
        a, b = missing[int(rng.integers(len(missing)))]
        adj2 = adj.copy()
        adj2[a, b] = adj2[b, a] = True
        for key in ("degree", "diffusion_degree", "latora_closeness"):
            assert stat(adj2, a, key) >= stat(adj, a, key) - 1e-12


def test_brute_force_equivalence_random_graphs():
    rng = np.random.default_rng(3)
    for _ in range(25):
        n = int(rng.integers(2, 9))
        pts = rng.uniform(0, 1, size=(n, 2))
        adj = np.linalg.norm(pts[:, None] - pts[None, :], axis=2) <= float(rng.uniform(0.2, 0.7))
        np.fill_diagonal(adj, False)
        assert_matches_oracles(adj, int(rng.integers(n)))


def test_mean_aggregation_hook():
    adj = adj_from_edges(4, [(0, 1), (1, 2), (2, 3)])
    registry = default_registry()
    means = compute_network_features(graph_from_adj(adj, 0), registry, aggregate="mean")
    per_node = np.array(
        [compute_network_features(graph_from_adj(adj, c), registry) for c in range(4)]
    )
    np.testing.assert_allclose(means, per_node.mean(axis=0), atol=1e-12)
    assert means[KEY_INDEX["node_count"]] == 4.0


def test_registry_selection_and_params():
    registry = default_registry(decay_delta=0.3, kpath_k=2, include=["degree", "decay", "geodesic_kpath"])
    assert registry.keys() == ("degree", "decay", "geodesic_kpath")
    adj = adj_from_edges(4, [(0, 1), (1, 2), (2, 3)])
    values = compute_network_features(graph_from_adj(adj, 0), registry)
    assert values[0] == 1.0
    assert values[1] == pytest.approx(0.3 + 0.3**2 + 0.3**3)
    assert values[2] == 2.0  # nodes within distance 2
    with pytest.raises(ValidationError):
        default_registry(include=["degree", "nonsense"])


def test_network_matrix_block_shape_and_names():
    rng = np.random.default_rng(4)
    coords = rng.uniform(0, 100, size=(30, 2))
    index = build_index(coords)
    block = network_matrix(coords, index, radius=60.0, k_max=40, edge_threshold=30.0)
    assert block.values.shape == (30, 29)
    assert block.col_names == REGISTRY.keys()
    assert np.isfinite(block.values).all()

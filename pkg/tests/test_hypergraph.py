"""Hypergraph construction, degrees, and normalized Laplacian."""

import numpy as np
import pytest

from hgdl.attention import AdmmParams
from hgdl.errors import InputError, InternalError, ParameterError
from hgdl.hypergraph import (
    LB,
    SAF,
    UNLABELED,
    DegreePair,
    Hypergraph,
    HypergraphConfig,
    build_laplacian,
    build_lb_hypergraph,
    build_saf_hypergraph,
    degrees,
    fuse,
    knn_neighbors,
    laplacian,
)
from oracles import (
    brute_force_knn,
    cd_lasso,
    literal_manifold_penalty,
    normalized_graph_laplacian,
    python_degrees,
    random_hypergraph,
)

PARAMS = AdmmParams(epsilon=2.0 ** -6)


# ---------------------------------------------------------------- knn


def test_knn_matches_brute_force():
    rng = np.random.default_rng(11)
    X = rng.normal(size=(7, 25))
    for k in (1, 3, 10):
        got = knn_neighbors(X, k)
        want = brute_force_knn(X, k)
        assert got.shape == (25, k)
        assert np.array_equal(got, np.asarray(want))


def test_knn_tie_break_by_index():
    # columns 1 and 2 are both at distance 1 from column 0
    X = np.array([[0.0, 1.0, -1.0, 2.0], [0.0, 0.0, 0.0, 0.0]])
    nbrs = knn_neighbors(X, 2)
    assert nbrs[0].tolist() == [1, 2]
    # from column 3: distances 1 (col 1), 2 (col 0), 3 (col 2)
    assert nbrs[3].tolist() == [1, 0]


def test_knn_excludes_self():
    rng = np.random.default_rng(5)
    X = rng.normal(size=(4, 12))
    nbrs = knn_neighbors(X, 11)
    for c in range(12):
        assert c not in nbrs[c]
        assert len(set(nbrs[c].tolist())) == 11


def test_knn_validation():
    X = np.zeros((3, 5))
    with pytest.raises(ParameterError):
        knn_neighbors(X, 0)
    with pytest.raises(ParameterError):
        knn_neighbors(X, 5)
    with pytest.raises(ParameterError):
        knn_neighbors(np.zeros(5), 2)
    bad = np.zeros((3, 5))
    bad[1, 2] = np.nan
    with pytest.raises(InputError):
        knn_neighbors(bad, 2)


# ---------------------------------------------------------------- saf modal


def test_saf_shape_and_center_entries():
    rng = np.random.default_rng(23)
    X = rng.normal(size=(6, 15))
    hg = build_saf_hypergraph(X, 4, PARAMS)
    assert hg.incidence.shape == (15, 15)
    assert np.array_equal(np.diag(hg.incidence), np.ones(15))
    assert np.array_equal(hg.edge_weights, np.ones(15))
    assert all(t == SAF for t in hg.modal_tags)
    # each edge touches only the center and its knn
    nbrs = knn_neighbors(X, 4)
    for c in range(15):
        support = set(np.flatnonzero(hg.incidence[:, c]).tolist())
        assert support <= set(nbrs[c].tolist()) | {c}


def test_saf_entries_without_attention():
    """With attention off, entries are the plain Gaussian of scaled distance."""
    rng = np.random.default_rng(3)
    X = rng.normal(size=(5, 10))
    hg = build_saf_hypergraph(X, 3, PARAMS, use_attention=False)
    nbrs = brute_force_knn(X, 3)
    for c in range(10):
        dists = [float(np.linalg.norm(X[:, v] - X[:, c])) for v in nbrs[c]]
        sigma = sum(dists) / 3.0
        for v, d in zip(nbrs[c], dists):
            if v == c:
                continue
            assert hg.incidence[v, c] == pytest.approx(
                np.exp(-((d / sigma) ** 2)), abs=1e-12
            )
        assert hg.incidence[c, c] == 1.0


def test_saf_attention_concentrates_on_duplicate():
    """An exact duplicate neighbor absorbs the weight; orthogonal far
    neighbors are pruned to zero by the sparsity penalty."""
    eps = 2.0 ** -6
    X = np.zeros((8, 6))
    X[0, 0] = 1.0
    X[0, 1] = 1.0  # duplicate of column 0
    for j in range(2, 6):
        X[j, j] = 3.0
    hg = build_saf_hypergraph(X, 5, AdmmParams(epsilon=eps))
    col = hg.incidence[:, 0]
    # orthogonal design: the lasso solution is (1 - eps) on the duplicate
    assert col[1] == pytest.approx(1.0 - eps, abs=1e-5)
    assert np.all(col[2:] <= 1e-6)
    assert col[0] == 1.0


def test_saf_entries_match_cd_oracle():
    """Entry formula checked against an independent lasso solver."""
    rng = np.random.default_rng(77)
    X = rng.normal(size=(12, 14))
    k = 6
    eps = 0.05
    hg = build_saf_hypergraph(X, k, AdmmParams(epsilon=eps))
    nbrs = brute_force_knn(X, k)
    for c in (0, 7, 13):
        idx = np.asarray(nbrs[c])
        dist = np.asarray(
            [float(np.linalg.norm(X[:, v] - X[:, c])) for v in idx]
        )
        sigma = float(np.mean(dist))
        q = cd_lasso(X[:, c], X[:, idx], eps)
        want = np.exp(-((dist / sigma) ** 2)) * np.maximum(q, 0.0)
        assert np.allclose(hg.incidence[idx, c], want, atol=1e-4)


def test_saf_identical_columns_uses_unit_bandwidth():
    # all-equal columns: every distance is 0, sigma falls back to 1.0
    X = np.ones((4, 5))
    hg = build_saf_hypergraph(X, 2, PARAMS, use_attention=False)
    for c in range(5):
        support = np.flatnonzero(hg.incidence[:, c])
        assert np.array_equal(hg.incidence[support, c], np.ones(len(support)))
    with_attention = build_saf_hypergraph(X, 2, PARAMS)
    assert np.all(np.isfinite(with_attention.incidence))
    assert np.all(with_attention.incidence >= 0.0)


# ---------------------------------------------------------------- label modal


def test_lb_basic():
    labels = np.array([0, 1, 0, UNLABELED, 2])
    hg = build_lb_hypergraph(labels)
    assert hg.incidence.shape == (5, 3)
    assert np.array_equal(
        hg.incidence,
        np.array(
            [
                [1.0, 0.0, 0.0],
                [0.0, 1.0, 0.0],
                [1.0, 0.0, 0.0],
                [0.0, 0.0, 0.0],
                [0.0, 0.0, 1.0],
            ]
        ),
    )
    assert all(t == LB for t in hg.modal_tags)
    assert np.array_equal(hg.edge_weights, np.ones(3))


def test_lb_skips_absent_classes():
    labels = np.array([0, 2, 0])
    hg = build_lb_hypergraph(labels)  # class 1 never appears
    assert hg.incidence.shape == (3, 2)
    hg5 = build_lb_hypergraph(labels, n_classes=5)
    assert hg5.incidence.shape == (3, 2)


def test_lb_all_unlabeled_is_empty():
    hg = build_lb_hypergraph(np.full(4, UNLABELED))
    assert hg.incidence.shape == (4, 0)
    assert hg.n_edges == 0


def test_lb_validation():
    with pytest.raises(InputError):
        build_lb_hypergraph(np.array([0.0, 1.0]))
    with pytest.raises(InputError):
        build_lb_hypergraph(np.array([0, 3]), n_classes=3)
    with pytest.raises(InputError):
        build_lb_hypergraph(np.array([0, -2]))
    with pytest.raises(ParameterError):
        build_lb_hypergraph(np.array([], dtype=int))


# ---------------------------------------------------------------- fuse


def test_fuse_concatenates_in_order():
    a = Hypergraph(np.eye(3), np.ones(3), np.asarray([SAF] * 3))
    b = Hypergraph(np.ones((3, 2)), np.full(2, 2.0), np.asarray([LB] * 2))
    fused = fuse(a, b)
    assert fused.incidence.shape == (3, 5)
    assert np.array_equal(fused.incidence[:, :3], np.eye(3))
    assert np.array_equal(fused.incidence[:, 3:], np.ones((3, 2)))
    assert fused.edge_weights.tolist() == [1.0, 1.0, 1.0, 2.0, 2.0]
    assert fused.modal_tags.tolist() == [SAF, SAF, SAF, LB, LB]


def test_fuse_rejects_vertex_mismatch():
    a = Hypergraph(np.eye(3), np.ones(3), np.asarray([SAF] * 3))
    b = Hypergraph(np.eye(4), np.ones(4), np.asarray([LB] * 4))
    with pytest.raises(ParameterError):
        fuse(a, b)


def test_hypergraph_validation():
    with pytest.raises(InputError):
        Hypergraph(-np.eye(2), np.ones(2), np.asarray([SAF] * 2))
    with pytest.raises(InputError):
        Hypergraph(np.eye(2), np.array([1.0, 0.0]), np.asarray([SAF] * 2))
    with pytest.raises(ParameterError):
        Hypergraph(np.eye(2), np.ones(3), np.asarray([SAF] * 3))
    with pytest.raises(ParameterError):
        Hypergraph(np.ones(3), np.ones(1), np.asarray([SAF]))


# ---------------------------------------------------------------- degrees


def test_degrees_match_python_loops_exactly():
    rng = np.random.default_rng(31)
    for _ in range(10):
        H, W = random_hypergraph(rng, 9, 6)
        hg = Hypergraph(H, W, np.asarray([SAF] * 6))
        same, deg = degrees(hg)
        assert same is hg
        vertex, edge = python_degrees(H, W)
        # cumsum folds in the same ascending order as the loops
        assert np.array_equal(deg.edge_degrees, np.asarray(edge))
        assert np.array_equal(deg.vertex_degrees, np.asarray(vertex))


def test_degrees_drop_zero_edges_with_warning():
    H = np.array([[1.0, 0.0, 0.5], [0.5, 0.0, 1.0]])
    hg = Hypergraph(H, np.ones(3), np.asarray([SAF, LB, SAF]))
    with pytest.warns(RuntimeWarning, match="zero degree"):
        kept, deg = degrees(hg)
    assert kept.n_edges == 2
    assert kept.modal_tags.tolist() == [SAF, SAF]
    assert deg.edge_degrees.tolist() == [1.5, 1.5]


def test_degrees_zero_vertex_is_internal_error():
    H = np.array([[1.0], [0.0]])  # vertex 1 sits in no edge
    hg = Hypergraph(H, np.ones(1), np.asarray([SAF]))
    with pytest.raises(InternalError):
        degrees(hg)


# ---------------------------------------------------------------- laplacian


def test_laplacian_single_all_vertex_edge():
    n = 6
    hg = Hypergraph(np.ones((n, 1)), np.ones(1), np.asarray([SAF]))
    hg, deg = degrees(hg)
    lap = laplacian(hg, deg)
    want = np.eye(n) - np.full((n, n), 1.0 / n)
    assert np.allclose(lap, want, atol=1e-15)


def test_laplacian_size2_edges_match_graph_oracle():
    # every hyperedge of size two: the hypergraph laplacian equals half
    # the usual normalized graph laplacian
    edges = [(0, 1), (1, 2), (2, 3), (3, 0), (0, 2), (1, 2)]
    n = 4
    H = np.zeros((n, len(edges)))
    for e, (u, v) in enumerate(edges):
        H[u, e] = 1.0
        H[v, e] = 1.0
    hg = Hypergraph(H, np.ones(len(edges)), np.asarray([SAF] * len(edges)))
    hg, deg = degrees(hg)
    lap = laplacian(hg, deg)
    want = normalized_graph_laplacian(n, edges) / 2.0
    assert np.allclose(lap, want, atol=1e-12)


def test_laplacian_symmetric_psd_and_null_vector():
    rng = np.random.default_rng(47)
    for _ in range(20):
        H, W = random_hypergraph(rng, 12, 7)
        hg = Hypergraph(H, W, np.asarray([SAF] * 7))
        hg, deg = degrees(hg)
        lap = laplacian(hg, deg)
        assert np.array_equal(lap, lap.T)
        eigs = np.linalg.eigvalsh(lap)
        assert eigs.min() >= -1e-8
        # sqrt of the vertex degrees spans the exact null space
        null = np.sqrt(deg.vertex_degrees)
        assert np.max(np.abs(lap @ null)) <= 1e-10


def test_trace_identity_matches_literal_double_sum():
    rng = np.random.default_rng(53)
    for _ in range(8):
        H, W = random_hypergraph(rng, 10, 5)
        hg = Hypergraph(H, W, np.asarray([SAF] * 5))
        hg, deg = degrees(hg)
        lap = laplacian(hg, deg)
        S = rng.normal(size=(3, 10))
        fast = float(np.sum((S @ lap) * S))
        slow = literal_manifold_penalty(H, W, S)
        assert fast == pytest.approx(slow, rel=1e-9)


def test_laplacian_rejects_bad_degrees():
    hg = Hypergraph(np.ones((3, 2)), np.ones(2), np.asarray([SAF] * 2))
    with pytest.raises(ParameterError):
        laplacian(hg, DegreePair(np.ones(2), np.ones(2)))
    with pytest.raises(InternalError):
        laplacian(hg, DegreePair(np.zeros(3), np.ones(2)))


# ---------------------------------------------------------------- composition


def test_build_laplacian_matches_manual_composition():
    rng = np.random.default_rng(61)
    X = rng.normal(size=(6, 18))
    labels = np.asarray([0, 1, 2] * 6)
    config = HypergraphConfig(admm=PARAMS, k_nn=4)
    got = build_laplacian(X, labels, config)
    saf = build_saf_hypergraph(X, 4, PARAMS)
    hg, deg = degrees(fuse(saf, build_lb_hypergraph(labels)))
    want = laplacian(hg, deg)
    assert np.array_equal(got, want)


def test_build_laplacian_without_labels():
    rng = np.random.default_rng(67)
    X = rng.normal(size=(5, 12))
    config = HypergraphConfig(admm=PARAMS, k_nn=3, use_labels=False)
    got = build_laplacian(X, np.zeros(12, dtype=int), config)
    also = build_laplacian(X, None, HypergraphConfig(admm=PARAMS, k_nn=3))
    assert np.array_equal(got, also)
    saf = build_saf_hypergraph(X, 3, PARAMS)
    hg, deg = degrees(saf)
    assert np.array_equal(got, laplacian(hg, deg))


def test_config_validation():
    with pytest.raises(ParameterError):
        HypergraphConfig(admm=PARAMS, k_nn=0)

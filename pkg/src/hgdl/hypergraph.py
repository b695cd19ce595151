"""Two-modal hypergraph over sample columns and its normalized Laplacian.

The feature modal places one hyperedge on every sample's knn
neighborhood; the entry of neighbor v in center c's edge is a Gaussian
of the bandwidth-scaled distance times a nonnegative sparse attention
weight, and the center's own entry is pinned to 1. The label modal adds
one 0/1 hyperedge per class over the labeled samples. From the fused
incidence matrix H with edge weights W the degrees are

    delta(e) = sum_v H(v, e)        (hyperedge degree)
    d(v)     = sum_e W(e) H(v, e)   (vertex degree)

and the normalized Laplacian is

    L = I - Dv^{-1/2} H W De^{-1} H^T Dv^{-1/2}

symmetrized as (L + L^T)/2. Its quadratic form penalizes disagreement of
degree-scaled values inside each hyperedge, so positive semidefiniteness
holds up to rounding.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .attention import AdmmParams, solve_attention
from .errors import InputError, InternalError, ParameterError

SAF = "saf"  # sparse-attention feature modal
LB = "lb"  # label modal
UNLABELED = -1


@dataclass(frozen=True)
class Hypergraph:
    """Incidence matrix (vertices x edges) with per-edge weights and tags.

    Entries are nonnegative and finite; weights are positive; tags mark
    which modal each edge belongs to. Treat all arrays as read-only.
    """

    incidence: np.ndarray
    edge_weights: np.ndarray
    modal_tags: np.ndarray

    def __post_init__(self):
        H = np.asarray(self.incidence, dtype=float)
        w = np.asarray(self.edge_weights, dtype=float)
        tags = np.asarray(self.modal_tags)
        object.__setattr__(self, "incidence", H)
        object.__setattr__(self, "edge_weights", w)
        object.__setattr__(self, "modal_tags", tags)
        if H.ndim != 2:
            raise ParameterError("incidence must be 2-d")
        if H.shape[0] < 1:
            raise ParameterError("hypergraph needs at least one vertex")
        if w.shape != (H.shape[1],) or tags.shape != (H.shape[1],):
            raise ParameterError("one weight and one tag per hyperedge")
        if not np.all(np.isfinite(H)) or np.any(H < 0):
            raise InputError("incidence entries must be finite and >= 0")
        if not np.all(np.isfinite(w)) or np.any(w <= 0):
            raise InputError("edge weights must be finite and positive")

    @property
    def n_vertices(self) -> int:
        return self.incidence.shape[0]

    @property
    def n_edges(self) -> int:
        return self.incidence.shape[1]


@dataclass(frozen=True)
class DegreePair:
    """Vertex degrees d(v) and hyperedge degrees delta(e) of a hypergraph."""

    vertex_degrees: np.ndarray
    edge_degrees: np.ndarray


@dataclass
class HypergraphConfig:
    """How to build the fused hypergraph for a feature matrix.

    use_attention=False fixes every attention weight to 1 (the plain
    similarity hypergraph); use_labels=False drops the label modal.
    """

    admm: AdmmParams
    k_nn: int = 10
    use_attention: bool = True
    use_labels: bool = True

    def __post_init__(self):
        if self.k_nn < 1:
            raise ParameterError("k_nn must be at least 1")


def knn_neighbors(X, k):
    """Indices of each column's k nearest other columns.

    Euclidean distance between columns; neighbors are sorted by ascending
    distance with ties broken by ascending column index. Returns an
    (N, k) integer array.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ParameterError("feature matrix must be 2-d (features x samples)")
    if not np.all(np.isfinite(X)):
        raise InputError("feature matrix contains non-finite entries")
    n = X.shape[1]
    if not 1 <= k < n:
        raise ParameterError(f"k must satisfy 1 <= k < {n}, got {k}")
    dist = cdist(X.T, X.T)
    np.fill_diagonal(dist, np.inf)
    # stable sort keeps ascending index order among exact distance ties
    order = np.argsort(dist, axis=1, kind="stable")
    return order[:, :k]


def build_saf_hypergraph(X, k, attention_params: AdmmParams,
                         use_attention: bool = True) -> Hypergraph:
    """One hyperedge per sample over its knn neighborhood.

    Neighbor v of center c gets entry exp(-(d(v,c)/sigma_c)^2) * w_v
    where sigma_c is the mean distance from c to its k neighbors (1.0
    when all neighbors coincide with c) and w_v is the attention weight
    of v clamped at zero. The center's own entry is 1, so every vertex
    has positive degree. Centers are independent of one another, so the
    loop could run in parallel; it is kept sequential for determinism.
    """
    X = np.asarray(X, dtype=float)
    neighbors = knn_neighbors(X, k)
    n = X.shape[1]
    H = np.zeros((n, n))
    for c in range(n):
        idx = neighbors[c]
        diffs = X[:, idx] - X[:, c : c + 1]
        dist = np.sqrt(np.sum(diffs * diffs, axis=0))
        sigma = float(np.mean(dist))
        if sigma == 0.0:
            sigma = 1.0
        if use_attention:
            sol = solve_attention(X[:, c], X[:, idx], attention_params)
            if not sol.converged:
                warnings.warn(
                    f"attention solve for center {c} hit max_iter "
                    f"({sol.iterations}); using best iterate",
                    RuntimeWarning,
                )
            weights = np.maximum(sol.q, 0.0)
        else:
            weights = np.ones(k)
        H[idx, c] = np.exp(-((dist / sigma) ** 2)) * weights
        H[c, c] = 1.0
    return Hypergraph(H, np.ones(n), np.asarray([SAF] * n))


def build_lb_hypergraph(labels, n_classes=None) -> Hypergraph:
    """One 0/1 hyperedge per class over the labeled vertices.

    Unlabeled vertices (label UNLABELED) get zero rows; classes with no
    labeled vertex yield no column, so the result can have zero edges.
    """
    labels = np.asarray(labels)
    if labels.ndim != 1 or labels.size < 1:
        raise ParameterError("labels must be a non-empty 1-d array")
    if not np.issubdtype(labels.dtype, np.integer):
        raise InputError("labels must be integers")
    labeled = labels != UNLABELED
    if np.any(labels[labeled] < 0):
        raise InputError("negative labels other than the UNLABELED sentinel")
    if n_classes is None:
        n_classes = int(labels[labeled].max()) + 1 if labeled.any() else 0
    elif labeled.any() and int(labels[labeled].max()) >= n_classes:
        raise InputError("label outside [0, n_classes)")
    columns = []
    for c in range(n_classes):
        members = labels == c
        if members.any():
            columns.append(members.astype(float))
    if columns:
        H = np.column_stack(columns)
    else:
        H = np.zeros((labels.size, 0))
    n_edges = H.shape[1]
    return Hypergraph(H, np.ones(n_edges), np.asarray([LB] * n_edges))


def fuse(first: Hypergraph, second: Hypergraph) -> Hypergraph:
    """Concatenate two hypergraphs over the same vertex set, columns of
    the first hypergraph coming first."""
    if first.n_vertices != second.n_vertices:
        raise ParameterError(
            f"vertex counts differ: {first.n_vertices} vs {second.n_vertices}"
        )
    return Hypergraph(
        np.hstack([first.incidence, second.incidence]),
        np.concatenate([first.edge_weights, second.edge_weights]),
        np.concatenate([np.asarray(first.modal_tags), np.asarray(second.modal_tags)]),
    )


def degrees(hg: Hypergraph):
    """Degrees of a hypergraph; zero-degree edges are dropped with a warning.

    Returns (hypergraph, DegreePair) where the hypergraph is the input
    unless edges were dropped. Sums accumulate in ascending index order
    so repeated runs agree bit for bit. A zero vertex degree cannot arise
    from the constructors in this module and raises InternalError.
    """
    H = hg.incidence
    if hg.n_edges > 0:
        edge_deg = np.cumsum(H, axis=0)[-1, :]
    else:
        edge_deg = np.zeros(0)
    dead = edge_deg == 0.0
    if dead.any():
        warnings.warn(
            f"dropping {int(dead.sum())} hyperedge(s) with zero degree",
            RuntimeWarning,
        )
        keep = ~dead
        hg = Hypergraph(
            H[:, keep], hg.edge_weights[keep], np.asarray(hg.modal_tags)[keep]
        )
        H = hg.incidence
        edge_deg = edge_deg[keep]
    if hg.n_edges > 0:
        vertex_deg = np.cumsum(H * hg.edge_weights, axis=1)[:, -1]
    else:
        vertex_deg = np.zeros(hg.n_vertices)
    if np.any(vertex_deg <= 0.0):
        bad = int(np.flatnonzero(vertex_deg <= 0.0)[0])
        raise InternalError(
            f"vertex {bad} has zero degree; construction should prevent this"
        )
    return hg, DegreePair(vertex_degrees=vertex_deg, edge_degrees=edge_deg)


def laplacian(hg: Hypergraph, deg: DegreePair) -> np.ndarray:
    """Normalized hypergraph Laplacian I - Dv^{-1/2} H W De^{-1} H^T Dv^{-1/2}.

    The adjacency part accumulates one outer product per hyperedge, in
    ascending edge order and restricted to each edge's support. The
    result is symmetrized as (L + L^T)/2.
    """
    H = hg.incidence
    n = hg.n_vertices
    dv = np.asarray(deg.vertex_degrees, dtype=float)
    de = np.asarray(deg.edge_degrees, dtype=float)
    if dv.shape != (n,) or de.shape != (hg.n_edges,):
        raise ParameterError("degree shapes do not match the hypergraph")
    if np.any(dv <= 0) or np.any(de <= 0):
        raise InternalError("nonpositive degree reached laplacian()")
    root = 1.0 / np.sqrt(dv)
    theta = np.zeros((n, n))
    for e in range(hg.n_edges):
        col = H[:, e]
        idx = np.flatnonzero(col)
        g = col[idx] * root[idx]
        theta[np.ix_(idx, idx)] += (hg.edge_weights[e] / de[e]) * np.outer(g, g)
    lap = np.eye(n) - theta
    return (lap + lap.T) / 2.0


def build_laplacian(X, labels, config: HypergraphConfig) -> np.ndarray:
    """Fused knn + label hypergraph for X, reduced to its Laplacian.

    labels may be None (or all-UNLABELED) when config.use_labels is
    False or no label modal is wanted.
    """
    saf = build_saf_hypergraph(
        X, config.k_nn, config.admm, use_attention=config.use_attention
    )
    if config.use_labels and labels is not None:
        hg = fuse(saf, build_lb_hypergraph(labels))
    else:
        hg = saf
    hg, deg = degrees(hg)
    return laplacian(hg, deg)

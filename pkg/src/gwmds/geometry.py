"""Synthetic manifolds, their distorted views, geodesic distances and
the classical-MDS / Multi-Isomap baselines."""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components, shortest_path
from scipy.spatial.distance import cdist

from .relational import (
    MultiViewDataset,
    RelationalMatrix,
    SampleMatrix,
    mean_relational,
    pairwise_euclidean,
)

logger = logging.getLogger(__name__)

MANIFOLDS = ("s_curve", "swiss_roll", "mobius", "torus")

TORUS_R = 2.0
TORUS_r = 1.0

ROTATION_DEG = 40.0
SHEAR = np.array(
    [
        [1.8, 0.3, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, 0.0, 0.6],
    ]
)


class DisconnectedGraphError(ValueError):
    """The neighbour graph splits into several components."""

    def __init__(self, sizes, view=None):
        self.sizes = sorted(sizes, reverse=True)
        self.view = view
        prefix = "" if view is None else f"view {view}: "
        super().__init__(
            f"{prefix}neighbour graph has {len(sizes)} connected components of sizes {self.sizes}; "
            "increase k or enable component bridging"
        )


@dataclass(frozen=True)
class ManifoldSample:
    points: np.ndarray
    intrinsic: np.ndarray
    kind: str


@dataclass(frozen=True)
class Embedding:
    """Low-dimensional coordinates plus where they came from.

    Attributes
    ----------
    coords : ndarray of shape (n, q)
    method : str
    seed : int or None
    view : int or None
        Index of the view this embedding is aligned to, if any.
    info : dict
        Free-form run metadata (objective, iterations, ...).
    """

    coords: np.ndarray
    method: str = ""
    seed: int | None = None
    view: int | None = None
    info: dict | None = None

    @property
    def shape(self):
        return self.coords.shape

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self.coords
        return self.coords.astype(dtype)


def _canonical_kind(kind: str) -> str:
    k = kind.lower().replace("-", "_")
    aliases = {"scurve": "s_curve", "swissroll": "swiss_roll", "moebius": "mobius"}
    k = aliases.get(k, k)
    if k not in MANIFOLDS:
        raise ValueError(f"unknown manifold kind {kind!r}; choose from {', '.join(MANIFOLDS)}")
    return k


def generate_manifold(kind: str, n: int = 500, noise: float = 0.0, seed=None) -> ManifoldSample:
    """Sample ``n`` points from a 2-D manifold embedded in 3-D.

    Parameters
    ----------
    kind : {'s_curve', 'swiss_roll', 'mobius', 'torus'}
    n : int
    noise : float
        Standard deviation of isotropic Gaussian noise added to the points.
    seed : int, optional

    Returns
    -------
    ManifoldSample
        ``intrinsic`` holds the generating parameters; its first column is
        the coordinate used for colouring plots.
    """
    kind = _canonical_kind(kind)
    if n < 10:
        raise ValueError("need n >= 10 samples")
    if noise < 0:
        raise ValueError("noise must be nonnegative")
    rng = np.random.default_rng(seed)

    if kind == "s_curve":
        t = 3 * np.pi * (rng.uniform(size=n) - 0.5)
        u = rng.uniform(size=n)
        X = np.column_stack([np.sin(t), 2.0 * u, np.sign(t) * (np.cos(t) - 1)])
        intrinsic = np.column_stack([t, u])
    elif kind == "swiss_roll":
        t = 1.5 * np.pi * (1 + 2 * rng.uniform(size=n))
        h = 21.0 * rng.uniform(size=n)
        X = np.column_stack([t * np.cos(t), h, t * np.sin(t)])
        intrinsic = np.column_stack([t, h])
    elif kind == "mobius":
        theta = 2 * np.pi * rng.uniform(size=n)
        w = rng.uniform(-1.0, 1.0, size=n)
        radial = 1.0 + 0.5 * w * np.cos(theta / 2)
        X = np.column_stack(
            [radial * np.cos(theta), radial * np.sin(theta), 0.5 * w * np.sin(theta / 2)]
        )
        intrinsic = np.column_stack([theta, w])
    else:
        theta = 2 * np.pi * rng.uniform(size=n)
        phi = 2 * np.pi * rng.uniform(size=n)
        ring = TORUS_R + TORUS_r * np.cos(phi)
        X = np.column_stack([ring * np.cos(theta), ring * np.sin(theta), TORUS_r * np.sin(phi)])
        intrinsic = np.column_stack([theta, phi])

    if noise > 0:
        X = X + noise * rng.standard_normal(X.shape)
    return ManifoldSample(points=X, intrinsic=intrinsic, kind=kind)


def rotation_z(degrees: float = ROTATION_DEG) -> np.ndarray:
    th = np.deg2rad(degrees)
    c, s = np.cos(th), np.sin(th)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def make_views(M) -> MultiViewDataset:
    """Two views: a 40 degree rotation about z, and a scale-and-shear."""
    X = np.asarray(M.points if isinstance(M, ManifoldSample) else M, dtype=float)
    if X.ndim != 2 or X.shape[1] != 3:
        raise ValueError(f"views are defined for 3-D points, got shape {X.shape}")
    row_ids = tuple(range(X.shape[0]))
    view1 = SampleMatrix(X @ rotation_z().T, row_ids)
    view2 = SampleMatrix(X @ SHEAR.T, row_ids)
    meta = {"kind": M.kind} if isinstance(M, ManifoldSample) else {}
    return MultiViewDataset((view1, view2), row_ids, meta)


@dataclass(frozen=True)
class NeighborGraph:
    """Undirected weighted graph stored as an edge list with ``i < j``."""

    n: int
    edges: np.ndarray
    weights: np.ndarray
    k: int
    bridges: tuple = ()

    def edge_set(self) -> set:
        return {(int(i), int(j)) for i, j in self.edges}

    def to_sparse(self) -> csr_matrix:
        i, j = self.edges[:, 0], self.edges[:, 1]
        W = csr_matrix(
            (np.concatenate([self.weights, self.weights]), (np.concatenate([i, j]), np.concatenate([j, i]))),
            shape=(self.n, self.n),
        )
        return W


def knn_graph(X, k: int = 10) -> NeighborGraph:
    """Union-symmetrised k-nearest-neighbour graph.

    Ties in distance go to the smaller index. Zero-length edges between
    duplicate points are kept with the smallest positive weight.
    """
    X = np.asarray(X, dtype=float)
    n = X.shape[0]
    if not 1 <= k < n:
        raise ValueError(f"k must satisfy 1 <= k < n={n}, got {k}")
    D = cdist(X, X)
    np.fill_diagonal(D, np.inf)
    order = np.argsort(D, axis=1, kind="stable")[:, :k]
    src = np.repeat(np.arange(n), k)
    dst = order.ravel()
    lo = np.minimum(src, dst)
    hi = np.maximum(src, dst)
    pairs = np.unique(np.column_stack([lo, hi]), axis=0)
    w = D[pairs[:, 0], pairs[:, 1]]
    w = np.maximum(w, np.finfo(float).tiny)
    return NeighborGraph(n=n, edges=pairs, weights=w, k=k)


def _bridge(G: NeighborGraph, X) -> NeighborGraph:
    X = np.asarray(X, dtype=float)
    edges = [tuple(e) for e in G.edges]
    weights = list(G.weights)
    bridges = []
    D = cdist(X, X)
    while True:
        W = NeighborGraph(G.n, np.asarray(edges), np.asarray(weights), G.k).to_sparse()
        n_comp, labels = connected_components(W, directed=False)
        if n_comp == 1:
            break
        cross = labels[:, None] != labels[None, :]
        Dc = np.where(cross, D, np.inf)
        i, j = np.unravel_index(np.argmin(Dc), Dc.shape)
        i, j = (int(i), int(j)) if i < j else (int(j), int(i))
        edges.append((i, j))
        weights.append(max(D[i, j], np.finfo(float).tiny))
        bridges.append((i, j, float(D[i, j])))
        logger.info("bridged components with edge (%d, %d) of length %.6g", i, j, D[i, j])
    return NeighborGraph(G.n, np.asarray(edges), np.asarray(weights), G.k, tuple(bridges))


def geodesic_distances(G: NeighborGraph, X=None, bridge_components: bool = False) -> RelationalMatrix:
    """All-pairs shortest paths over a neighbour graph.

    Parameters
    ----------
    G : NeighborGraph
    X : array-like, optional
        The points the graph was built from; needed only for bridging.
    bridge_components : bool
        If the graph is disconnected, repeatedly add the shortest
        Euclidean edge between two components instead of failing.
    """
    W = G.to_sparse()
    n_comp, labels = connected_components(W, directed=False)
    if n_comp > 1:
        if not bridge_components or X is None:
            raise DisconnectedGraphError(np.bincount(labels).tolist())
        G = _bridge(G, X)
        W = G.to_sparse()
    D = shortest_path(W, method="D", directed=False)
    D = 0.5 * (D + D.T)
    return RelationalMatrix(D, "geodesic")


def view_distances(view, metric: str = "euclidean", k: int = 10, bridge_components: bool = False):
    """Relational matrix of one view under the requested metric."""
    if isinstance(view, RelationalMatrix):
        return view
    if metric == "euclidean":
        return pairwise_euclidean(view)
    if metric == "geodesic":
        X = np.asarray(view, dtype=float)
        return geodesic_distances(knn_graph(X, k), X, bridge_components)
    if metric == "precomputed":
        return RelationalMatrix(np.asarray(view, dtype=float), "precomputed")
    raise ValueError(f"unknown metric {metric!r}")


def dataset_distances(data, metric="euclidean", k=10, bridge_components=False) -> list:
    """Relational matrix for every view, naming the view on failure."""
    if not isinstance(data, MultiViewDataset):
        data = MultiViewDataset(tuple(data))
    out = []
    for v, view in enumerate(data.views):
        try:
            out.append(view_distances(view, metric, k, bridge_components))
        except DisconnectedGraphError as exc:
            raise DisconnectedGraphError(exc.sizes, view=v) from exc
        except (ValueError, ArithmeticError) as exc:
            raise type(exc)(f"view {v}: {exc}") from exc
    return out


def classical_mds(D, q: int = 2) -> Embedding:
    """Torgerson scaling of a dissimilarity matrix.

    Each axis is flipped so that its largest-magnitude coordinate is
    positive. If fewer than ``q`` eigenvalues are positive the remaining
    axes are zero and a warning is issued.
    """
    D = np.asarray(D, dtype=float)
    n = D.shape[0]
    if not 1 <= q < n:
        raise ValueError(f"embedding dimension q={q} must satisfy 1 <= q < n={n}")
    J = np.eye(n) - 1.0 / n
    B = -0.5 * J @ (D**2) @ J
    B = 0.5 * (B + B.T)
    evals, evecs = np.linalg.eigh(B)
    order = np.argsort(evals)[::-1][:q]
    evals = evals[order]
    evecs = evecs[:, order]
    tol = 1e-12 * max(abs(evals[0]), 1.0) if evals.size else 0.0
    positive = evals > tol
    if not positive.all():
        warnings.warn(
            f"only {int(positive.sum())} positive eigenvalues for q={q}; padding with zeros",
            RuntimeWarning,
        )
    Y = evecs * np.sqrt(np.where(positive, evals, 0.0))
    for c in range(q):
        j = np.argmax(np.abs(Y[:, c]))
        if Y[j, c] < 0:
            Y[:, c] = -Y[:, c]
    return Embedding(Y, method="cmds")


def multi_isomap(data, k: int = 10, q: int = 2, bridge_components: bool = False) -> Embedding:
    """Average the per-view geodesic matrices, then classical MDS."""
    Ds = dataset_distances(data, "geodesic", k, bridge_components)
    D = mean_relational(Ds)
    emb = classical_mds(D, q)
    return Embedding(emb.coords, method="multi-isomap", info={"k": k})

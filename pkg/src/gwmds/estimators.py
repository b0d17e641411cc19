"""scikit-learn style wrappers.

The estimators take a list of views (each an ``(n, p_v)`` array, or an
``(n, n)`` dissimilarity matrix with ``dissimilarity='precomputed'``)
and expose the embedding through ``fit_transform``, mirroring
:class:`sklearn.manifold.MDS`.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils import check_array

from .geometry import dataset_distances, multi_isomap
from .gw import GwConfig, MdsConfig, gwmds_embed
from .multiview import mean_gwmds, multi_gwmds
from .relational import MultiViewDataset, RelationalMatrix, SampleMatrix

DISSIMILARITIES = ("euclidean", "geodesic", "precomputed")


def check_views(Xs, dissimilarity: str = "euclidean") -> list:
    """Validate a list of views and turn them into relational matrices."""
    if dissimilarity not in DISSIMILARITIES:
        raise ValueError(f"dissimilarity must be one of {DISSIMILARITIES}, got {dissimilarity!r}")
    if isinstance(Xs, MultiViewDataset):
        Xs = list(Xs.views)
    elif isinstance(Xs, np.ndarray) and Xs.ndim == 2:
        Xs = [Xs]
    if len(Xs) == 0:
        raise ValueError("need at least one view")
    views = []
    n = None
    for v, X in enumerate(Xs):
        X = check_array(np.asarray(X), ensure_min_samples=2, dtype=float, input_name=f"view {v}")
        if n is None:
            n = X.shape[0]
        elif X.shape[0] != n:
            raise ValueError(f"view {v} has {X.shape[0]} samples, expected {n}")
        if dissimilarity == "precomputed":
            if X.shape != (n, n):
                raise ValueError(f"precomputed view {v} must be square, got {X.shape}")
            views.append(RelationalMatrix(X, "precomputed"))
        else:
            views.append(SampleMatrix(X))
    return views


class _GWBase(BaseEstimator):
    def _configs(self):
        mds = MdsConfig(
            embed_dim=self.n_components,
            learning_rate=self.learning_rate,
            max_epochs=self.max_epochs,
            epoch_tol=self.epoch_tol,
            init=self.init,
            seed=self.random_state,
        )
        gw = GwConfig(
            inner_ot=self.ot_solver,
            epsilon=self.epsilon,
            n_restarts=self.n_restarts,
            seed=self.random_state,
        )
        return mds, gw

    def _distances(self, Xs):
        views = check_views(Xs, self.dissimilarity)
        metric = "precomputed" if self.dissimilarity == "precomputed" else self.dissimilarity
        return dataset_distances(MultiViewDataset(tuple(views)), metric, self.n_neighbors)

    def fit_transform(self, X, y=None):
        self.fit(X, y)
        return self.embedding_


class GWMDS(_GWBase):
    """Single-view GW multidimensional scaling.

    Parameters
    ----------
    n_components : int, default=2
    dissimilarity : {'euclidean', 'geodesic', 'precomputed'}, default='euclidean'
    n_neighbors : int, default=10
        Neighbour count for geodesic graphs.
    learning_rate : float, default=1.0
        Fraction of the majorisation step taken in the embedding block.
    max_epochs, epoch_tol : int, float
    n_restarts : int, default=3
    init : {'cmds', 'gaussian'}, default='cmds'
    ot_solver : {'exact', 'entropic'}, default='exact'
    epsilon : float, optional
    random_state : int, default=0

    Attributes
    ----------
    embedding_ : ndarray of shape (n_samples, n_components)
    coupling_ : ndarray of shape (n_samples, n_samples)
    gw_sq_ : float
    n_iter_ : int
    """

    def __init__(
        self,
        n_components=2,
        dissimilarity="euclidean",
        n_neighbors=10,
        learning_rate=1.0,
        max_epochs=200,
        epoch_tol=1e-6,
        n_restarts=3,
        init="cmds",
        ot_solver="exact",
        epsilon=None,
        random_state=0,
    ):
        self.n_components = n_components
        self.dissimilarity = dissimilarity
        self.n_neighbors = n_neighbors
        self.learning_rate = learning_rate
        self.max_epochs = max_epochs
        self.epoch_tol = epoch_tol
        self.n_restarts = n_restarts
        self.init = init
        self.ot_solver = ot_solver
        self.epsilon = epsilon
        self.random_state = random_state

    def fit(self, X, y=None):
        (D,) = self._distances([X])
        mds, gw = self._configs()
        emb = gwmds_embed(D, mds, gw)
        self.embedding_ = emb.coords
        self.coupling_ = emb.info["coupling"].plan
        self.gw_sq_ = emb.info["gw_sq"]
        self.n_iter_ = emb.info["iterations"]
        return self


class MeanGWMDS(GWMDS):
    """Average the views' dissimilarities, then GW-MDS.

    Same parameters as :class:`GWMDS`. ``fit`` takes a list of views.

    Attributes
    ----------
    embedding_ : ndarray of shape (n_samples, n_components)
    view_correlations_ : ndarray of shape (n_views,)
    gw_sq_ : float
    n_iter_ : int
    """

    def fit(self, Xs, y=None):
        Ds = self._distances(Xs)
        mds, gw = self._configs()
        emb = mean_gwmds(Ds, mds, gw)
        self.embedding_ = emb.coords
        self.view_correlations_ = np.asarray(emb.info["view_correlations"])
        self.gw_sq_ = emb.info["gw_sq"]
        self.n_iter_ = emb.info["iterations"]
        return self


class MultiGWMDS(GWMDS):
    """Shared embedding with one coupling per view, then selection.

    Extra parameters
    ----------------
    view_weights : array-like of shape (n_views,), optional
        Uniform by default.
    selection : {'max_corr', 'min_rho'}, default='max_corr'
    aggregate : {'mean', 'median', 'maxmin'}, default='mean'

    Attributes
    ----------
    embedding_ : ndarray
        The selected aligned embedding.
    aligned_embeddings_ : list of ndarray
    shared_embedding_ : ndarray
    couplings_ : list of ndarray
    scores_ : ndarray of shape (n_views,)
    selected_view_ : int
    objective_trace_ : list of float
    """

    def __init__(
        self,
        n_components=2,
        dissimilarity="euclidean",
        n_neighbors=10,
        learning_rate=1.0,
        max_epochs=200,
        epoch_tol=1e-6,
        n_restarts=3,
        init="cmds",
        ot_solver="exact",
        epsilon=None,
        random_state=0,
        view_weights=None,
        selection="max_corr",
        aggregate="mean",
    ):
        super().__init__(
            n_components=n_components,
            dissimilarity=dissimilarity,
            n_neighbors=n_neighbors,
            learning_rate=learning_rate,
            max_epochs=max_epochs,
            epoch_tol=epoch_tol,
            n_restarts=n_restarts,
            init=init,
            ot_solver=ot_solver,
            epsilon=epsilon,
            random_state=random_state,
        )
        self.view_weights = view_weights
        self.selection = selection
        self.aggregate = aggregate

    def fit(self, Xs, y=None):
        Ds = self._distances(Xs)
        mds, gw = self._configs()
        res = multi_gwmds(
            Ds, self.view_weights, mds, gw, selection=self.selection, aggregate=self.aggregate
        )
        self.result_ = res
        self.embedding_ = res.embedding.coords
        self.aligned_embeddings_ = [e.coords for e in res.aligned_embeddings]
        self.shared_embedding_ = res.shared_embedding.coords
        self.couplings_ = [c.plan for c in res.couplings]
        self.scores_ = res.scores
        self.selected_view_ = res.selected_view
        self.objective_trace_ = res.objective_trace
        return self


class MultiIsomap(BaseEstimator):
    """Mean of per-view geodesic distances followed by classical MDS."""

    def __init__(self, n_components=2, n_neighbors=10, bridge_components=False):
        self.n_components = n_components
        self.n_neighbors = n_neighbors
        self.bridge_components = bridge_components

    def fit(self, Xs, y=None):
        views = check_views(Xs, "euclidean")
        emb = multi_isomap(MultiViewDataset(tuple(views)), self.n_neighbors, self.n_components, self.bridge_components)
        self.embedding_ = emb.coords
        return self

    def fit_transform(self, Xs, y=None):
        return self.fit(Xs).embedding_

"""Multi-view strategies built on GW-MDS.

``mean_gwmds`` averages the per-view relational matrices and embeds the
average once. ``multi_gwmds`` fits one shared embedding with one coupling
per view, maps the shared embedding onto each view's samples through
its coupling, and keeps the candidate whose distances agree best with
all views.
"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field

import numpy as np

from .geometry import Embedding, dataset_distances
from .gw import GwConfig, MdsConfig, barycentric_align, fit_joint, gwmds_embed
from .ot import Coupling, uniform
from .relational import (
    DegenerateInputError,
    MultiViewDataset,
    RelationalMatrix,
    distance_correlation,
    mean_relational,
    pairwise_euclidean,
)

__all__ = [
    "ViewWeights",
    "MultiGwResult",
    "mean_gwmds",
    "multi_gwmds_optimize",
    "barycentric_align",
    "select_representative",
    "multi_gwmds",
    "joint_objective",
]

logger = logging.getLogger(__name__)

SELECTIONS = ("max_corr", "min_rho")
AGGREGATES = ("mean", "median", "maxmin")


class ViewWeights:
    """Nonnegative view weights on the probability simplex.

    Any nonnegative vector with positive sum is accepted and divided by
    its sum.
    """

    def __init__(self, weights):
        w = np.asarray(weights, dtype=float).ravel()
        if w.size == 0 or np.any(w < 0) or not np.all(np.isfinite(w)) or w.sum() <= 0:
            raise ValueError("view weights must be finite, nonnegative and not all zero")
        self.values = w / w.sum()

    @classmethod
    def uniform(cls, n_views: int) -> "ViewWeights":
        return cls(np.ones(n_views))

    def __len__(self):
        return self.values.size

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)

    def __repr__(self):
        return f"ViewWeights({self.values.tolist()})"


@dataclass
class MultiGwResult:
    shared_embedding: Embedding
    couplings: list
    aligned_embeddings: list
    scores: np.ndarray
    selected_view: int
    objective_trace: list
    view_correlations: np.ndarray = field(default_factory=lambda: np.zeros(0))
    degenerate: tuple = ()
    criterion: str = "max_corr"
    aggregate: str = "mean"

    @property
    def embedding(self) -> Embedding:
        return self.aligned_embeddings[self.selected_view]


def _relational_views(data, metric, k, bridge_components):
    if isinstance(data, MultiViewDataset) or not all(isinstance(D, RelationalMatrix) for D in data):
        return dataset_distances(data, metric, k, bridge_components)
    return list(data)


def _weights(weights, n_views):
    if weights is None:
        return ViewWeights.uniform(n_views)
    if not isinstance(weights, ViewWeights):
        weights = ViewWeights(weights)
    if len(weights) != n_views:
        raise ValueError(f"{len(weights)} view weights for {n_views} views")
    return weights


def _view_correlations(Ds, Y):
    DY = pairwise_euclidean(Y)
    return np.array([distance_correlation(D, DY) for D in Ds])


def mean_gwmds(
    data,
    mds_cfg: MdsConfig | None = None,
    gw_cfg: GwConfig | None = None,
    metric: str = "euclidean",
    k: int = 10,
    bridge_components: bool = False,
) -> Embedding:
    """Average the views' relational matrices, then run GW-MDS once.

    Parameters
    ----------
    data : MultiViewDataset or sequence of RelationalMatrix
    metric : {'euclidean', 'geodesic', 'precomputed'}
        How each feature view becomes a relational matrix.

    Returns
    -------
    Embedding
        ``info['view_correlations']`` holds the correlation of the
        embedding's distances with each view.
    """
    Ds = _relational_views(data, metric, k, bridge_components)
    Dbar = mean_relational(Ds)
    emb = gwmds_embed(Dbar, mds_cfg, gw_cfg)
    info = dict(emb.info)
    try:
        info["view_correlations"] = _view_correlations(Ds, emb.coords).tolist()
    except DegenerateInputError:
        info["view_correlations"] = [float("nan")] * len(Ds)
    info.update(metric=metric, k=k)
    return Embedding(emb.coords, method="mean-gwmds", seed=emb.seed, info=info)


def joint_objective(Ds, Y, plans, weights) -> float:
    """``sum_v w_v sum (D_v[i,k] - DY[j,l])^2 P_v[i,j] P_v[k,l]``."""
    from .gw import gw_objective

    DY = pairwise_euclidean(Y).values if np.asarray(Y).shape[0] > 1 else np.zeros((1, 1))
    w = np.asarray(weights, dtype=float)
    return float(sum(wv * gw_objective(D, DY, P) for wv, D, P in zip(w, Ds, plans)))


def multi_gwmds_optimize(
    data,
    weights=None,
    mds_cfg: MdsConfig | None = None,
    gw_cfg: GwConfig | None = None,
    metric: str = "euclidean",
    k: int = 10,
    bridge_components: bool = False,
):
    """Shared embedding and one coupling per view.

    Returns
    -------
    shared : Embedding
        The unaligned shared coordinates; ``info['objective_trace']`` lists
        the joint objective at initialisation and after each accepted epoch.
    couplings : list of Coupling
        ``couplings[v].plan[i, j]`` couples sample ``i`` of view ``v`` with
        embedding point ``j``.
    """
    mds_cfg = mds_cfg or MdsConfig()
    gw_cfg = gw_cfg or GwConfig()
    Ds = _relational_views(data, metric, k, bridge_components)
    lam = _weights(weights, len(Ds))
    fit = fit_joint(Ds, lam.values, mds_cfg, gw_cfg)
    n = Ds[0].shape[0]
    couplings = [
        Coupling(P, uniform(n), uniform(n), converged=fit.converged, iterations=fit.epochs)
        for P in fit.plans
    ]
    info = {
        "objective": fit.objective,
        "objective_trace": fit.trace,
        "iterations": fit.epochs,
        "converged": fit.converged,
        "restart": fit.restart,
        "weights": lam.values.tolist(),
        "config": {"mds": mds_cfg.as_dict(), "gw": asdict(gw_cfg)},
    }
    return Embedding(fit.Y, method="multi-gwmds-shared", seed=mds_cfg.seed, info=info), couplings


def _aggregate(corrs: np.ndarray, how: str) -> float:
    if how == "mean":
        return float(np.mean(corrs))
    if how == "median":
        return float(np.median(corrs))
    if how == "maxmin":
        return float(np.min(corrs))
    raise ValueError(f"unknown aggregate {how!r}; choose from {', '.join(AGGREGATES)}")


def select_index(scores, selection: str = "max_corr") -> int:
    """Index of the best score; ties go to the lowest index."""
    s = np.asarray(scores, dtype=float)
    if selection == "max_corr":
        return int(np.argmax(s))
    if selection == "min_rho":
        return int(np.argmin(np.where(np.isneginf(s), np.inf, s)))
    raise ValueError(f"unknown selection {selection!r}; choose from {', '.join(SELECTIONS)}")


def select_representative(data, aligned, selection="max_corr", aggregate="mean"):
    """Score each aligned candidate by its agreement with every view.

    ``score[v]`` aggregates ``corr(D_u, D_{Y_v})`` over all views ``u``.
    A candidate whose distances have no variance scores ``-inf``.

    Returns
    -------
    selected : int
    scores : ndarray of shape (V,)
    degenerate : tuple of int
        Views whose candidate was degenerate.
    """
    Ds = data if not isinstance(data, MultiViewDataset) else dataset_distances(data)
    Ds = [np.asarray(D, dtype=float) for D in Ds]
    n = Ds[0].shape[0]
    scores = np.empty(len(aligned))
    degenerate = []
    for v, Y in enumerate(aligned):
        Y = np.asarray(Y, dtype=float)
        if Y.shape[0] != n:
            raise ValueError(f"aligned embedding {v} has {Y.shape[0]} rows, expected {n}")
        DY = pairwise_euclidean(Y)
        try:
            corrs = np.array([distance_correlation(D, DY) for D in Ds])
        except DegenerateInputError:
            scores[v] = -np.inf
            degenerate.append(v)
            logger.warning("aligned embedding for view %d is degenerate", v)
            continue
        scores[v] = _aggregate(corrs, aggregate)
    return select_index(scores, selection), scores, tuple(degenerate)


def multi_gwmds(
    data,
    weights=None,
    mds_cfg: MdsConfig | None = None,
    gw_cfg: GwConfig | None = None,
    metric: str = "euclidean",
    k: int = 10,
    bridge_components: bool = False,
    selection: str = "max_corr",
    aggregate: str = "mean",
) -> MultiGwResult:
    """Joint fit, per-view barycentric alignment, then selection."""
    if selection not in SELECTIONS:
        raise ValueError(f"unknown selection {selection!r}")
    if aggregate not in AGGREGATES:
        raise ValueError(f"unknown aggregate {aggregate!r}")
    Ds = _relational_views(data, metric, k, bridge_components)
    shared, couplings = multi_gwmds_optimize(Ds, weights, mds_cfg, gw_cfg)
    aligned = []
    for v, c in enumerate(couplings):
        try:
            Yv = barycentric_align(shared.coords, c.plan.T)
        except ValueError as exc:
            raise ValueError(f"view {v}: {exc}") from exc
        aligned.append(Embedding(Yv, method="multi-gwmds", seed=shared.seed, view=v))
    selected, scores, degenerate = select_representative(Ds, aligned, selection, aggregate)
    own = []
    for v, (D, Yv) in enumerate(zip(Ds, aligned)):
        try:
            own.append(distance_correlation(D, pairwise_euclidean(Yv)))
        except DegenerateInputError:
            own.append(float("nan"))
    return MultiGwResult(
        shared_embedding=shared,
        couplings=couplings,
        aligned_embeddings=aligned,
        scores=scores,
        selected_view=selected,
        objective_trace=shared.info["objective_trace"],
        view_correlations=np.asarray(own),
        degenerate=degenerate,
        criterion=selection,
        aggregate=aggregate,
    )

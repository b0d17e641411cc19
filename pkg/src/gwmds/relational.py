"""Pairwise dissimilarity matrices and the distance-correlation score.

Every strategy in this package talks to every other one through dense
``n x n`` relational matrices: symmetric, nonnegative, zero on the
diagonal. This module builds them, averages them and compares them.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.spatial.distance import cdist

METRIC_TAGS = ("euclidean", "geodesic", "precomputed")

SYMMETRY_TOL = 1e-9


class DegenerateInputError(ValueError):
    """Raised when a score is undefined, e.g. a zero-variance triangle."""


@dataclass(frozen=True)
class RelationalMatrix:
    """Validated dense dissimilarity matrix.

    Parameters
    ----------
    values : ndarray of shape (n, n)
        Pairwise dissimilarities. Symmetric within ``1e-9``, zero
        diagonal, finite and nonnegative.
    metric_tag : {'euclidean', 'geodesic', 'precomputed'}
        Where the values came from.
    """

    values: np.ndarray
    metric_tag: str = "precomputed"

    def __post_init__(self):
        D = np.array(self.values, dtype=float, copy=True)
        if D.ndim != 2 or D.shape[0] != D.shape[1]:
            raise ValueError(f"relational matrix must be square, got shape {D.shape}")
        if self.metric_tag not in METRIC_TAGS:
            raise ValueError(f"unknown metric_tag {self.metric_tag!r}")
        if not np.all(np.isfinite(D)):
            i, j = np.argwhere(~np.isfinite(D))[0]
            raise ValueError(f"non-finite entry at ({i}, {j})")
        if np.any(D < 0):
            i, j = np.argwhere(D < 0)[0]
            raise ValueError(f"negative entry {D[i, j]!r} at ({i}, {j})")
        scale = max(1.0, float(np.abs(D).max(initial=0.0)))
        if np.abs(D - D.T).max(initial=0.0) > SYMMETRY_TOL * scale:
            raise ValueError("relational matrix is not symmetric")
        if np.abs(np.diag(D)).max(initial=0.0) > SYMMETRY_TOL * scale:
            raise ValueError("relational matrix has a nonzero diagonal")
        D = 0.5 * (D + D.T)
        np.fill_diagonal(D, 0.0)
        D.setflags(write=False)
        object.__setattr__(self, "values", D)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def shape(self):
        return self.values.shape

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self.values
        return self.values.astype(dtype)

    def to_csv(self, path) -> None:
        np.savetxt(path, self.values, delimiter=",", fmt="%.17g")

    @classmethod
    def from_csv(cls, path, metric_tag: str = "precomputed") -> "RelationalMatrix":
        values = np.loadtxt(path, delimiter=",", ndmin=2)
        return cls(values, metric_tag)

    def to_json(self) -> str:
        return json.dumps(
            {
                "n": self.n,
                "metric_tag": self.metric_tag,
                "values": [float(v) for v in self.values.ravel()],
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "RelationalMatrix":
        obj = json.loads(text)
        n = int(obj["n"])
        values = np.asarray(obj["values"], dtype=float).reshape(n, n)
        return cls(values, obj.get("metric_tag", "precomputed"))


def as_relational(D, metric_tag: str = "precomputed") -> RelationalMatrix:
    if isinstance(D, RelationalMatrix):
        return D
    return RelationalMatrix(np.asarray(D, dtype=float), metric_tag)


@dataclass(frozen=True)
class SampleMatrix:
    """Samples in rows, features in columns, with stable row identifiers."""

    values: np.ndarray
    row_ids: tuple = ()

    def __post_init__(self):
        X = np.array(self.values, dtype=float, copy=True)
        if X.ndim == 1:
            X = X[:, None]
        if X.ndim != 2:
            raise ValueError(f"sample matrix must be 2-D, got {X.ndim}-D")
        if X.shape[0] < 2:
            raise ValueError("need at least 2 samples")
        bad = ~np.all(np.isfinite(X), axis=1)
        if bad.any():
            raise ValueError(f"non-finite values in row {int(np.argmax(bad))}")
        row_ids = tuple(self.row_ids) if len(self.row_ids) else tuple(range(X.shape[0]))
        if len(row_ids) != X.shape[0]:
            raise ValueError(f"{len(row_ids)} row ids for {X.shape[0]} rows")
        X.setflags(write=False)
        object.__setattr__(self, "values", X)
        object.__setattr__(self, "row_ids", row_ids)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self.values
        return self.values.astype(dtype)


@dataclass(frozen=True)
class MultiViewDataset:
    """Ordered views of the same samples.

    Each view is either a :class:`SampleMatrix` (features) or a
    :class:`RelationalMatrix` (precomputed dissimilarities). All views
    share ``n`` and the row ordering.
    """

    views: tuple
    row_ids: tuple = ()
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        views = []
        for v in self.views:
            if isinstance(v, (SampleMatrix, RelationalMatrix)):
                views.append(v)
            else:
                views.append(SampleMatrix(np.asarray(v, dtype=float)))
        if not views:
            raise ValueError("a multi-view dataset needs at least one view")
        n = views[0].n
        for v, view in enumerate(views):
            if view.n != n:
                raise ValueError(f"view {v} has {view.n} samples, expected {n}")
        row_ids = tuple(self.row_ids)
        if not row_ids:
            first = views[0]
            row_ids = first.row_ids if isinstance(first, SampleMatrix) else tuple(range(n))
        if len(row_ids) != n:
            raise ValueError(f"{len(row_ids)} row ids for {n} samples")
        for v, view in enumerate(views):
            if isinstance(view, SampleMatrix) and view.row_ids != row_ids:
                if view.row_ids != tuple(range(n)):
                    raise ValueError(f"view {v} row ids differ from the dataset ordering")
        object.__setattr__(self, "views", tuple(views))
        object.__setattr__(self, "row_ids", row_ids)

    @property
    def n_views(self) -> int:
        return len(self.views)

    @property
    def n_samples(self) -> int:
        return self.views[0].n

    def __len__(self):
        return len(self.views)

    def __getitem__(self, v):
        return self.views[v]


def pairwise_euclidean(X) -> RelationalMatrix:
    """Euclidean distances between the rows of ``X``."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    bad = ~np.all(np.isfinite(X), axis=1)
    if bad.any():
        raise ValueError(f"non-finite values in row {int(np.argmax(bad))}")
    if X.shape[0] < 2:
        raise ValueError("need at least 2 samples")
    D = cdist(X, X)
    return RelationalMatrix(D, "euclidean")


def mean_relational(Ds: Sequence, weights=None) -> RelationalMatrix:
    """Entry-wise (weighted) mean of relational matrices.

    Parameters
    ----------
    Ds : sequence of array-like of shape (n, n)
    weights : array-like of shape (len(Ds),), optional
        Nonnegative, renormalised to sum to one. Uniform by default.

    Returns
    -------
    RelationalMatrix
        Tagged ``'precomputed'``.
    """
    if len(Ds) == 0:
        raise ValueError("cannot average an empty list of matrices")
    mats = [np.asarray(D, dtype=float) for D in Ds]
    shape = mats[0].shape
    for v, D in enumerate(mats):
        if D.shape != shape:
            raise ValueError(f"view {v} has shape {D.shape}, expected {shape}")
    if weights is None:
        out = np.zeros(shape)
        for D in mats:
            out += D
        out /= len(mats)
    else:
        w = np.asarray(weights, dtype=float)
        if w.shape != (len(mats),) or np.any(w < 0) or w.sum() <= 0:
            raise ValueError("weights must be nonnegative with positive sum, one per view")
        w = w / w.sum()
        out = np.zeros(shape)
        for wv, D in zip(w, mats):
            out += wv * D
    return RelationalMatrix(out, "precomputed")


def upper_triangle(D) -> np.ndarray:
    D = np.asarray(D)
    iu = np.triu_indices(D.shape[0], k=1)
    return D[iu]


def distance_correlation(DA, DB) -> float:
    """Pearson correlation between the strict upper triangles of two matrices.

    Raises
    ------
    DegenerateInputError
        If either triangle has zero variance.
    """
    A = np.asarray(DA, dtype=float)
    B = np.asarray(DB, dtype=float)
    if A.shape != B.shape:
        raise ValueError(f"shape mismatch {A.shape} vs {B.shape}")
    if A.shape[0] < 3:
        raise ValueError("need n >= 3 for a correlation over pairs")
    a = upper_triangle(A)
    b = upper_triangle(B)
    a = a - a.mean()
    b = b - b.mean()
    na = np.sqrt(a @ a)
    nb = np.sqrt(b @ b)
    scale_a = np.abs(upper_triangle(A)).max()
    scale_b = np.abs(upper_triangle(B)).max()
    if na <= 1e-12 * max(scale_a, 1e-300) * np.sqrt(a.size) or na == 0:
        raise DegenerateInputError("first matrix has zero variance over its upper triangle")
    if nb <= 1e-12 * max(scale_b, 1e-300) * np.sqrt(b.size) or nb == 0:
        raise DegenerateInputError("second matrix has zero variance over its upper triangle")
    r = float((a @ b) / (na * nb))
    return min(1.0, max(-1.0, r))


def save_relational(D: RelationalMatrix, path) -> None:
    path = Path(path)
    if path.suffix == ".json":
        path.write_text(D.to_json())
    else:
        D.to_csv(path)


def load_relational(path, metric_tag: str = "precomputed") -> RelationalMatrix:
    path = Path(path)
    if path.suffix == ".json":
        return RelationalMatrix.from_json(path.read_text())
    return RelationalMatrix.from_csv(path, metric_tag)

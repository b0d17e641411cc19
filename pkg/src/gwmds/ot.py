"""Discrete optimal transport between two weighted point sets.

The exact solver returns vertices of the transport polytope. When both
marginals are uniform and of equal size every vertex is a scaled
permutation matrix, so the problem is an assignment problem and is
solved with a Hungarian-type method; otherwise the linear program is
handed to the HiGHS dual simplex. The entropic solver is the usual
alternating marginal scaling with a log-domain fallback.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.optimize import linear_sum_assignment, linprog
from scipy.spatial.distance import cdist
from scipy.special import logsumexp

MARGINAL_TOL = 1e-6


class OTError(RuntimeError):
    """Raised when a transport problem cannot be solved."""


@dataclass(frozen=True)
class Coupling:
    """A transport plan together with its marginals.

    Attributes
    ----------
    plan : ndarray of shape (n, m)
    a : ndarray of shape (n,)
        Row marginal.
    b : ndarray of shape (m,)
        Column marginal.
    converged : bool
        Always ``True`` for exact plans.
    iterations : int
    """

    plan: np.ndarray
    a: np.ndarray
    b: np.ndarray
    converged: bool = True
    iterations: int = 0

    @property
    def shape(self):
        return self.plan.shape

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self.plan
        return self.plan.astype(dtype)

    def marginal_error(self) -> float:
        P = self.plan
        return float(max(np.abs(P.sum(1) - self.a).max(), np.abs(P.sum(0) - self.b).max()))

    def to_json(self) -> str:
        n, m = self.plan.shape
        return json.dumps(
            {
                "n": n,
                "m": m,
                "a": [float(x) for x in self.a],
                "b": [float(x) for x in self.b],
                "plan": [float(x) for x in self.plan.ravel()],
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "Coupling":
        obj = json.loads(text)
        n, m = int(obj["n"]), int(obj["m"])
        plan = np.asarray(obj["plan"], dtype=float).reshape(n, m)
        return cls(plan, np.asarray(obj["a"], float), np.asarray(obj["b"], float))


def uniform(n: int) -> np.ndarray:
    return np.full(n, 1.0 / n)


def check_marginals(a, b, n: int, m: int):
    """Validate and lightly renormalise a pair of marginals."""
    a = uniform(n) if a is None else np.asarray(a, dtype=float).ravel()
    b = uniform(m) if b is None else np.asarray(b, dtype=float).ravel()
    if a.shape != (n,) or b.shape != (m,):
        raise ValueError(f"marginal shapes {a.shape}, {b.shape} do not match cost ({n}, {m})")
    if np.any(a < 0) or np.any(b < 0) or not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise ValueError("marginals must be finite and nonnegative")
    sa, sb = a.sum(), b.sum()
    if abs(sa - 1.0) > MARGINAL_TOL or abs(sb - 1.0) > MARGINAL_TOL:
        raise OTError(f"infeasible marginals: masses {sa!r} and {sb!r} must both be 1")
    return a / sa, b / sb


def _is_uniform(w: np.ndarray) -> bool:
    return bool(np.all(w == w[0]))


def solve_exact_ot(C, a=None, b=None):
    """Exact Kantorovich transport.

    Parameters
    ----------
    C : array-like of shape (n, m)
        Cost matrix.
    a, b : array-like, optional
        Probability vectors, uniform by default.

    Returns
    -------
    coupling : Coupling
        A vertex of the transport polytope minimising ``<plan, C>``.
    objective : float
    """
    C = np.asarray(C, dtype=float)
    if C.ndim != 2:
        raise ValueError("cost must be a 2-D matrix")
    if not np.all(np.isfinite(C)):
        raise ValueError("cost matrix has non-finite entries")
    n, m = C.shape
    a, b = check_marginals(a, b, n, m)

    if n == m and _is_uniform(a) and _is_uniform(b):
        rows, cols = linear_sum_assignment(C)
        plan = np.zeros((n, m))
        plan[rows, cols] = 1.0 / n
    else:
        plan = _solve_lp(C, a, b)
    coupling = Coupling(plan, a, b)
    return coupling, float(np.sum(plan * C))


def _solve_lp(C, a, b):
    n, m = C.shape
    idx = np.arange(n * m)
    row_of = idx // m
    col_of = idx % m
    # row-sum constraints, then column sums; the last column sum is implied
    keep = col_of < m - 1
    rows = np.concatenate([row_of, n + col_of[keep]])
    cols = np.concatenate([idx, idx[keep]])
    A_eq = sparse.csr_matrix((np.ones(rows.size), (rows, cols)), shape=(n + m - 1, n * m))
    rhs = np.concatenate([a, b[:-1]])
    res = linprog(C.ravel(), A_eq=A_eq, b_eq=rhs, bounds=(0, None), method="highs-ds")
    if res.status != 0:
        raise OTError(f"linear program failed: {res.message}")
    return np.maximum(res.x.reshape(n, m), 0.0)


def default_epsilon(C) -> float:
    med = float(np.median(np.abs(C)))
    if med == 0.0:
        med = float(np.abs(C).mean()) or 1.0
    return 5e-3 * med


def solve_entropic_ot(C, a=None, b=None, epsilon=None, max_iter=10_000, tol=1e-9):
    """Entropy-regularised transport by Sinkhorn scaling.

    Parameters
    ----------
    C : array-like of shape (n, m)
    a, b : array-like, optional
        Marginals, uniform by default.
    epsilon : float, optional
        Regularisation strength; ``5e-3 * median(|C|)`` by default.
    max_iter : int
    tol : float
        Stop once the largest marginal violation drops below ``tol``.

    Returns
    -------
    coupling : Coupling
        ``converged`` is False if ``max_iter`` was hit; the plan is then the
        last iterate.
    objective : float
        Transport cost ``<plan, C>`` (without the entropy term).
    """
    C = np.asarray(C, dtype=float)
    if not np.all(np.isfinite(C)):
        raise ValueError("cost matrix has non-finite entries")
    n, m = C.shape
    a, b = check_marginals(a, b, n, m)
    if epsilon is None:
        epsilon = default_epsilon(C)
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")

    K = np.exp(-C / epsilon)
    if np.all(np.isfinite(K)) and K.min(initial=1.0) > 1e-200:
        with np.errstate(all="ignore"):
            plan, it, ok = _sinkhorn_scaling(K, a, b, max_iter, tol)
        if plan is None:
            plan, it, ok = _sinkhorn_log(C, a, b, epsilon, max_iter, tol)
    else:
        plan, it, ok = _sinkhorn_log(C, a, b, epsilon, max_iter, tol)
    if not ok:
        warnings.warn(f"Sinkhorn did not converge in {max_iter} iterations", RuntimeWarning)
    coupling = Coupling(plan, a, b, converged=ok, iterations=it)
    return coupling, float(np.sum(plan * C))


def _sinkhorn_scaling(K, a, b, max_iter, tol):
    u = np.ones_like(a)
    v = np.ones_like(b)
    for it in range(1, max_iter + 1):
        Kv = K @ v
        u = a / Kv
        Ktu = K.T @ u
        v = b / Ktu
        if not (np.all(np.isfinite(u)) and np.all(np.isfinite(v))):
            return None, it, False
        if it % 10 == 0 or it == max_iter:
            P = u[:, None] * K * v[None, :]
            if np.abs(P.sum(1) - a).max() < tol:
                return P, it, True
    return u[:, None] * K * v[None, :], max_iter, False


def _sinkhorn_log(C, a, b, epsilon, max_iter, tol):
    n, m = C.shape
    f = np.zeros(n)
    g = np.zeros(m)
    with np.errstate(divide="ignore"):
        log_a = np.log(a)
        log_b = np.log(b)
    for it in range(1, max_iter + 1):
        f = epsilon * (log_a - logsumexp((g[None, :] - C) / epsilon, axis=1))
        g = epsilon * (log_b - logsumexp((f[:, None] - C) / epsilon, axis=0))
        if it % 10 == 0 or it == max_iter:
            P = np.exp((f[:, None] + g[None, :] - C) / epsilon)
            if np.abs(P.sum(1) - a).max() < tol:
                return P, it, True
    return np.exp((f[:, None] + g[None, :] - C) / epsilon), max_iter, False


def wasserstein_p(X, Y, p: float = 1.0) -> float:
    """Order-``p`` Wasserstein distance between uniform empirical measures."""
    if p < 1:
        raise ValueError("order p must be >= 1")
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if Y.ndim == 1:
        Y = Y[:, None]
    if X.shape[1] != Y.shape[1]:
        raise ValueError(
            f"point sets live in different spaces ({X.shape[1]}-D vs {Y.shape[1]}-D); "
            "use a Gromov-Wasserstein comparison instead"
        )
    C = cdist(X, Y) ** p
    _, obj = solve_exact_ot(C)
    return max(obj, 0.0) ** (1.0 / p)

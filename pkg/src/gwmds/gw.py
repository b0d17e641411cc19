"""Gromov-Wasserstein discrepancy and GW multidimensional scaling.

With the squared loss the four-index objective factorises::

    sum_{i,l,j,k} (DX[i,l] - DY[j,k])**2 P[i,j] P[l,k]
        = p @ DX**2 @ p + q @ DY**2 @ q - 2 <DX @ P @ DY.T, P>

where ``p`` and ``q`` are the marginals of ``P``. Everything below works
with that form, so a single evaluation costs ``O(n^2 m + n m^2)``.

The embedding solver alternates two blocks. With the embedding fixed,
each coupling takes a conditional-gradient pass (linear OT direction,
exact quadratic line search). With the couplings fixed the objective is
a weighted metric stress in the embedding distances, which is decreased
by majorisation-preconditioned gradient steps. Both blocks are monotone.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.spatial.distance import cdist

from .geometry import Embedding, classical_mds
from .ot import Coupling, OTError, check_marginals, solve_entropic_ot, solve_exact_ot, uniform

logger = logging.getLogger(__name__)


class ConvergenceError(ArithmeticError):
    """The embedding optimiser kept increasing its objective."""


@dataclass
class GwConfig:
    """Settings for the conditional-gradient GW solver.

    ``outer_max_iter`` and ``outer_tol`` bound each conditional-gradient
    run. ``n_restarts`` counts independent starts; the lowest final
    objective wins, ties going to the earlier restart.
    """

    loss: str = "square_loss"
    inner_ot: str = "exact"
    epsilon: float | None = None
    outer_max_iter: int = 200
    outer_tol: float = 1e-9
    n_restarts: int = 3
    seed: int = 0

    def __post_init__(self):
        if self.loss not in ("square_loss", "squared"):
            raise ValueError(f"unsupported loss {self.loss!r}")
        if self.inner_ot not in ("exact", "entropic"):
            raise ValueError(f"unknown inner OT solver {self.inner_ot!r}")
        if not self.outer_tol > 0:
            raise ValueError("outer_tol must be positive")
        if self.n_restarts < 1:
            raise ValueError("n_restarts must be >= 1")


@dataclass
class MdsConfig:
    """Settings for the embedding block of GW-MDS.

    ``learning_rate`` scales the majorisation step; 1.0 is the full
    Guttman step and anything in (0, 1] is monotone.
    """

    embed_dim: int = 2
    learning_rate: float = 1.0
    max_epochs: int = 200
    epoch_tol: float = 1e-6
    y_steps: int = 5
    init: str = "cmds"
    init_embedding: np.ndarray | None = field(default=None, repr=False)
    seed: int = 0
    max_halvings: int = 5

    def __post_init__(self):
        if self.embed_dim < 1:
            raise ValueError("embed_dim must be >= 1")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if self.init in ("classical_mds",):
            self.init = "cmds"
        if self.init in ("random_gaussian",):
            self.init = "gaussian"
        if self.init not in ("cmds", "gaussian", "provided"):
            raise ValueError(f"unknown init {self.init!r}")
        if self.init == "provided" and self.init_embedding is None:
            raise ValueError("init='provided' needs init_embedding")

    def as_dict(self) -> dict:
        d = asdict(self)
        d.pop("init_embedding")
        return d


@dataclass
class GwResult:
    coupling: Coupling
    gw_sq: float
    converged: bool
    iterations: int
    restart: int = 0


def _sqdist_terms(DX, DY, a, b):
    # p @ DX**2 @ p + q @ DY**2 @ q split per (i, j)
    return ((DX**2) @ a)[:, None] + ((DY**2) @ b)[None, :]


def gw_objective(DX, DY, pi) -> float:
    """Squared-loss GW objective of a given coupling."""
    DX = np.asarray(DX, dtype=float)
    DY = np.asarray(DY, dtype=float)
    P = np.asarray(pi, dtype=float)
    n, m = P.shape
    if DX.shape != (n, n) or DY.shape != (m, m):
        raise ValueError(f"shapes DX {DX.shape}, DY {DY.shape} inconsistent with plan {P.shape}")
    p = P.sum(axis=1)
    q = P.sum(axis=0)
    val = p @ (DX**2) @ p + q @ (DY**2) @ q - 2.0 * np.sum((DX @ P @ DY.T) * P)
    return float(val)


def gw_gradient_embedding(DX, Y, pi) -> np.ndarray:
    """Gradient of ``gw_objective(DX, pdist(Y), pi)`` with respect to ``Y``."""
    DX = np.asarray(DX, dtype=float)
    Y = np.asarray(Y, dtype=float)
    P = np.asarray(pi, dtype=float)
    q = P.sum(axis=0)
    DY = cdist(Y, Y)
    B = P.T @ DX @ P
    # dE/dDY[j,k] = 2 (q_j q_k DY[j,k] - B[j,k]); symmetric
    G = 2.0 * (np.outer(q, q) * DY - 0.5 * (B + B.T))
    with np.errstate(divide="ignore", invalid="ignore"):
        R = np.where(DY > 0, 2.0 * G / DY, 0.0)
    np.fill_diagonal(R, 0.0)
    return R.sum(axis=1)[:, None] * Y - R @ Y


def _line_search(a_coef: float, b_coef: float) -> float:
    # minimise a t^2 + b t over [0, 1]
    if a_coef > 0:
        return float(min(1.0, max(0.0, -b_coef / (2.0 * a_coef))))
    return 1.0 if a_coef + b_coef < 0 else 0.0


def _linear_ot(cost, a, b, cfg: GwConfig):
    if cfg.inner_ot == "exact":
        coupling, _ = solve_exact_ot(cost, a, b)
    else:
        eps = cfg.epsilon
        if eps is None:
            eps = 5e-3 * max(float(np.median(np.abs(cost - cost.min()))), 1e-300)
        coupling, _ = solve_entropic_ot(cost - cost.min(), a, b, epsilon=eps)
    return coupling.plan


def conditional_gradient(DX, DY, a, b, P0, cfg: GwConfig, max_iter=None):
    """Frank-Wolfe on the GW objective starting from ``P0``.

    Returns ``(plan, objective, converged, iterations)``. The objective
    sequence never increases: the quadratic line search returns a zero
    step whenever the linear-OT direction does not help.
    """
    max_iter = cfg.outer_max_iter if max_iter is None else max_iter
    P = np.array(P0, dtype=float)
    const = _sqdist_terms(DX, DY, a, b)
    DXPDY = DX @ P @ DY.T
    f = float(np.sum((const - 2.0 * DXPDY) * P))
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        cost = const - 2.0 * DXPDY
        G = _linear_ot(cost, a, b, cfg)
        delta = G - P
        DXdDY = DX @ delta @ DY.T
        a_coef = -2.0 * float(np.sum(DXdDY * delta))
        b_coef = float(np.sum(cost * delta)) - 2.0 * float(np.sum(DXPDY * delta))
        alpha = _line_search(a_coef, b_coef)
        if alpha == 0.0:
            converged = True
            break
        P = P + alpha * delta
        DXPDY = DXPDY + alpha * DXdDY
        f_new = float(np.sum((const - 2.0 * DXPDY) * P))
        change = f - f_new
        f = min(f, f_new)
        if change <= cfg.outer_tol * max(abs(f), 1e-300):
            converged = True
            break
    return P, f, converged, it


def _restart_plan(r: int, n: int, m: int, a, b, cfg: GwConfig):
    square_uniform = n == m and np.all(a == a[0]) and np.all(b == b[0])
    if r == 0:
        return np.outer(a, b)
    if r == 1 and square_uniform:
        return np.eye(n) / n
    if square_uniform:
        # tiny polytopes: visit every permutation vertex in order
        if r - 2 < math.factorial(n) and math.factorial(n) <= cfg.n_restarts - 2:
            perm = next(itertools.islice(itertools.permutations(range(n)), r - 2, None))
        else:
            perm = np.random.default_rng([cfg.seed, r]).permutation(n)
        return np.eye(n)[list(perm)] / n
    rng = np.random.default_rng([cfg.seed, r])
    coupling, _ = solve_exact_ot(rng.uniform(size=(n, m)), a, b)
    return coupling.plan


def gw_distance(DX, DY, cfg: GwConfig | None = None, a=None, b=None) -> GwResult:
    """Squared GW discrepancy between two relational matrices.

    Restart 0 starts from the independent coupling ``a b^T``, restart 1
    from the identity when the supports have equal size and uniform
    weights, later restarts from random vertices of the polytope. When
    the restart budget covers every permutation vertex (``n! <=
    n_restarts - 2``) those vertices are visited exhaustively, so the
    result is never worse than the best permutation coupling.
    """
    cfg = cfg or GwConfig()
    DX = np.asarray(DX, dtype=float)
    DY = np.asarray(DY, dtype=float)
    n, m = DX.shape[0], DY.shape[0]
    if DX.shape != (n, n) or DY.shape != (m, m):
        raise ValueError("relational matrices must be square")
    a, b = check_marginals(a, b, n, m)

    best = None
    for r in range(cfg.n_restarts):
        P0 = _restart_plan(r, n, m, a, b, cfg)
        P, _, ok, it = conditional_gradient(DX, DY, a, b, P0, cfg)
        val = gw_objective(DX, DY, P)
        logger.debug("gw restart %d: %.6g after %d iterations", r, val, it)
        if best is None or val < best[1]:
            best = (P, val, ok, it, r)
    P, val, ok, it, r = best
    if val < 0:
        if val < -1e-9 * max(1.0, float(np.abs(DX).max()) ** 2):
            logger.warning("negative GW value %.3g clamped to zero", val)
        val = 0.0
    return GwResult(Coupling(P, a, b, converged=ok, iterations=it), val, ok, it, r)


def barycentric_align(Y, pi) -> np.ndarray:
    """Column-normalised barycentric map of the rows of ``Y``.

    Row ``k`` of the output is ``sum_i pi[i, k] Y[i] / sum_i pi[i, k]``.
    To place sample ``i`` of a view at the embedding points it is coupled
    with, pass the transpose of the (view x embedding) plan.
    """
    Y = np.asarray(Y, dtype=float)
    P = np.asarray(pi, dtype=float)
    if P.shape[0] != Y.shape[0]:
        raise ValueError(f"plan has {P.shape[0]} rows but Y has {Y.shape[0]}")
    mass = P.sum(axis=0)
    empty = np.flatnonzero(mass <= 0)
    if empty.size:
        raise ValueError(f"sample {int(empty[0])} receives no mass from the coupling")
    return (P / mass[None, :]).T @ Y


# embedding block -------------------------------------------------------------


def _pdist(Y):
    return cdist(Y, Y)


def _transported(Ds, plans, lam):
    B = np.zeros_like(Ds[0])
    for w, D, P in zip(lam, Ds, plans):
        B += w * (P.T @ D @ P)
    return 0.5 * (B + B.T)


def _joint_objective(Ds, plans, lam, Y):
    DY = _pdist(Y)
    return float(sum(w * gw_objective(D, DY, P) for w, D, P in zip(lam, Ds, plans)))


def _majorization_step(Y, B, eta):
    # weights are (1/n)^2 for uniform embedding marginals; the Guttman
    # transform equals Y - (n / 4) * grad for centred Y
    n = Y.shape[0]
    DY = _pdist(Y)
    w = 1.0 / (n * n)
    with np.errstate(divide="ignore", invalid="ignore"):
        R = np.where(DY > 0, B / DY, 0.0)
    np.fill_diagonal(R, 0.0)
    M = w - R
    np.fill_diagonal(M, 0.0)
    grad = 4.0 * (M.sum(axis=1)[:, None] * Y - M @ Y)
    return Y - eta * (n / 4.0) * grad


def _initial_embedding(Ds, lam, mds: MdsConfig, restart: int):
    n = Ds[0].shape[0]
    q = mds.embed_dim
    if restart == 0 and mds.init == "provided":
        Y = np.array(mds.init_embedding, dtype=float)
        if Y.shape != (n, q):
            raise ValueError(f"provided embedding has shape {Y.shape}, expected {(n, q)}")
    elif restart == 0 and mds.init == "cmds":
        Dbar = sum(w * D for w, D in zip(lam, Ds))
        import warnings

        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            Y = classical_mds(Dbar, q).coords
        if np.allclose(Y, 0):
            Y = _gaussian(Ds, lam, q, mds.seed, restart)
    else:
        Y = _gaussian(Ds, lam, q, mds.seed, restart)
    return Y - Y.mean(axis=0)


def _gaussian(Ds, lam, q, seed, restart):
    n = Ds[0].shape[0]
    scale = float(sum(w * D.mean() for w, D in zip(lam, Ds))) / np.sqrt(q)
    rng = np.random.default_rng([seed, restart])
    return scale * rng.standard_normal((n, q))


@dataclass
class JointFit:
    Y: np.ndarray
    plans: list
    objective: float
    trace: list
    epochs: int
    converged: bool
    restart: int
    learning_rate: float


def _fit_once(Ds, lam, mds: MdsConfig, gw: GwConfig, restart: int) -> JointFit:
    n = Ds[0].shape[0]
    a = uniform(n)
    Y = _initial_embedding(Ds, lam, mds, restart)
    plans = [np.eye(n) / n for _ in Ds]
    f = _joint_objective(Ds, plans, lam, Y)
    trace = [f]
    eta = mds.learning_rate
    halvings = 0
    converged = False
    epoch = 0
    while epoch < mds.max_epochs:
        DY = _pdist(Y)
        # Jacobi sweep: every coupling sees the same embedding
        new_plans = []
        for v, (D, P) in enumerate(zip(Ds, plans)):
            try:
                P_new, _, _, _ = conditional_gradient(D, DY, a, a, P, gw)
            except OTError as exc:
                raise OTError(f"view {v}: {exc}") from exc
            new_plans.append(P_new)
        B = _transported(Ds, new_plans, lam)
        Y_new = Y
        for _ in range(mds.y_steps):
            Y_new = _majorization_step(Y_new, B, eta)
        f_new = _joint_objective(Ds, new_plans, lam, Y_new)
        if not np.isfinite(f_new) or f_new > f + 1e-12 * max(abs(f), 1e-300):
            if f_new <= f + 1e-9 * max(abs(f), 1e-300):
                # increase at round-off level: nothing left to gain
                converged = True
                break
            halvings += 1
            if halvings > mds.max_halvings:
                raise ConvergenceError(
                    f"objective increased after {mds.max_halvings} step halvings (eta={eta:.3g})"
                )
            eta *= 0.5
            logger.info("objective increased at epoch %d; halving step to %.3g", epoch, eta)
            continue
        epoch += 1
        change = f - f_new
        Y, plans, f = Y_new, new_plans, f_new
        trace.append(f)
        if change <= mds.epoch_tol * max(abs(trace[-2]), 1e-300):
            converged = True
            break
    return JointFit(Y, plans, f, trace, epoch, converged, restart, eta)


def fit_joint(Ds, lam, mds: MdsConfig, gw: GwConfig) -> JointFit:
    """Minimise ``sum_v lam_v GW(D_v, D_Y; P_v)`` over ``Y`` and the ``P_v``.

    Runs ``gw.n_restarts`` starts (classical MDS or the provided
    embedding first, seeded Gaussians after) and keeps the lowest final
    objective.
    """
    Ds = [np.asarray(D, dtype=float) for D in Ds]
    n = Ds[0].shape[0]
    q = mds.embed_dim
    if q >= n:
        raise ValueError(f"embedding dimension q={q} must be smaller than n={n}")
    lam = np.asarray(lam, dtype=float)
    if all(not np.any(D) for D in Ds):
        Y = np.zeros((n, q))
        plans = [np.eye(n) / n for _ in Ds]
        return JointFit(Y, plans, 0.0, [0.0], 0, True, 0, mds.learning_rate)
    best = None
    for r in range(gw.n_restarts):
        fit = _fit_once(Ds, lam, mds, gw, r)
        logger.debug("restart %d: objective %.6g in %d epochs", r, fit.objective, fit.epochs)
        if best is None or fit.objective < best.objective:
            best = fit
    return best


def gwmds_embed(DX, mds_cfg: MdsConfig | None = None, gw_cfg: GwConfig | None = None) -> Embedding:
    """Embed a relational matrix so that its distances are GW-close to it.

    The returned coordinates are aligned to the samples of ``DX`` through
    the barycentric map of the final coupling.
    """
    mds_cfg = mds_cfg or MdsConfig()
    gw_cfg = gw_cfg or GwConfig()
    DX = np.asarray(DX, dtype=float)
    fit = fit_joint([DX], np.ones(1), mds_cfg, gw_cfg)
    P = fit.plans[0]
    n = DX.shape[0]
    coupling = Coupling(P, uniform(n), uniform(n), converged=fit.converged, iterations=fit.epochs)
    Y = barycentric_align(fit.Y, P.T)
    info = {
        "gw_sq": max(fit.objective, 0.0),
        "iterations": fit.epochs,
        "converged": fit.converged,
        "restart": fit.restart,
        "objective_trace": fit.trace,
        "coupling": coupling,
        "raw": fit.Y,
        "config": {"mds": mds_cfg.as_dict(), "gw": asdict(gw_cfg)},
    }
    return Embedding(Y, method="gwmds", seed=mds_cfg.seed, info=info)

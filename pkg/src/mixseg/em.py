"""EM estimation for the mixture of segmentations.

Each iteration runs an exact M-step (mixing weights in closed form, then an
optimal segmentation per cluster by dynamic programming over the segment
cost table) followed by the E-step, which also yields the observed-data
log-likelihood of the new parameters.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np
from scipy.cluster.vq import kmeans2
from scipy.special import logsumexp

from . import segcost
from .rng import substream
from .types import CoefficientTensor, FitReport, ModelConfig, ModelParams, canonicalize, check_responsibilities, hard_assign

log = logging.getLogger(__name__)

LOG2PI = np.log(2 * np.pi)
EMPTY_CLUSTER_SCALE = 1e-3


class InitMethod(str, Enum):
    RANDOM_RESP = "random_resp"
    KMEANS_SUMMARY = "kmeans_summary"


@dataclass(frozen=True)
class EMConfig:
    max_iter: int = 200
    rel_tol: float = 1e-6
    n_restarts: int = 10
    seed: int = 0
    init: InitMethod = InitMethod.RANDOM_RESP
    n_jobs: int = 1
    # after the restarts, try exchanging clusters that carry different L
    swap_refine: bool = True

    def __post_init__(self):
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be > 0")
        if self.n_restarts < 1:
            raise ValueError("n_restarts must be >= 1")
        object.__setattr__(self, "init", InitMethod(self.init))


class EmptyClusterError(RuntimeError):
    """A cluster's total responsibility fell below the empty-cluster threshold."""

    def __init__(self, cluster: int, mass: float, threshold: float):
        super().__init__(f"cluster {cluster + 1} is empty (mass {mass:.3g} < {threshold:.3g})")
        self.cluster = cluster


class DegenerateFitError(RuntimeError):
    """Every restart ended on an empty cluster."""


def _as_array(y) -> np.ndarray:
    if isinstance(y, CoefficientTensor):
        return y.y
    return np.asarray(y, dtype=float)


def cluster_log_densities(y, params: ModelParams) -> np.ndarray:
    """``log f_k(Y_i)`` for every individual and cluster, shape ``(n, K)``."""
    y = _as_array(y)
    n, d, p = y.shape
    if params.d != d or params.p != p:
        raise ValueError(f"params are for (d, p)=({params.d}, {params.p}), data has ({d}, {p})")
    mu, var = params.expanded()
    out = np.empty((n, params.K))
    for k in range(params.K):
        quad = ((y - mu[k]) ** 2 / var[k]).sum(axis=(1, 2))
        out[:, k] = -0.5 * (d * p * LOG2PI + np.log(var[k]).sum() + quad)
    return out


def _joint(y, params):
    with np.errstate(divide="ignore"):
        return cluster_log_densities(y, params) + np.log(params.pi)


def log_likelihood(y, params: ModelParams) -> float:
    return float(logsumexp(_joint(y, params), axis=1).sum())


def e_step_with_loglik(y, params: ModelParams) -> tuple[np.ndarray, float]:
    lj = _joint(y, params)
    norm = logsumexp(lj, axis=1, keepdims=True)
    return np.exp(lj - norm), float(norm.sum())


def e_step(y, params: ModelParams) -> np.ndarray:
    return e_step_with_loglik(y, params)[0]


def m_step_pi(s) -> np.ndarray:
    s = check_responsibilities(s)
    return s.sum(axis=0) / s.shape[0]


def q_value(y, s, params: ModelParams) -> float:
    """Expected complete-data log-likelihood under responsibilities ``s``."""
    s = np.asarray(s, dtype=float)
    lj = _joint(y, params)
    mask = s > 0
    return float((s[mask] * lj[mask]).sum())


def dp_segment(costs, L: int, min_segment_len: int = 1) -> tuple[np.ndarray, float]:
    """Optimal split of ``(0, d]`` into ``L + 1`` segments under an additive cost.

    ``costs[t1, t2]`` is the cost of the segment ``(t1, t2]`` (``inf`` when
    forbidden). Ties go to the smallest earlier breakpoint. Returns the
    breakpoint vector ``(0, T_1, ..., T_L, d)`` and its total cost.
    """
    costs = np.asarray(costs, dtype=float)
    d = costs.shape[0] - 1
    if costs.shape != (d + 1, d + 1):
        raise ValueError("cost table must be square")
    if L < 0 or (L + 1) * min_segment_len > d:
        raise ValueError(f"cannot place {L + 1} segments of length >= {min_segment_len} in d={d}")
    # segments shorter than the minimum (including empty or reversed ones) are forbidden
    idx = np.arange(d + 1)
    costs = np.where(idx[None, :] - idx[:, None] >= min_segment_len, costs, np.inf)
    best = costs[0].copy()
    back = np.zeros((L + 1, d + 1), dtype=np.int64)
    for l in range(1, L + 1):
        cand = best[:, None] + costs
        arg = np.argmin(cand, axis=0)
        best = cand[arg, np.arange(d + 1)]
        back[l] = arg
    total = best[d]
    if not np.isfinite(total):
        raise ValueError("no feasible segmentation for the given cost table")
    T = np.empty(L + 2, dtype=np.int64)
    T[-1] = d
    for l in range(L, 0, -1):
        T[l] = back[l][T[l + 1]]
    T[0] = 0
    return T, float(total)


def empty_threshold(n: int, K: int) -> float:
    return EMPTY_CLUSTER_SCALE * n / K


def m_step(y, stats: segcost.SegmentStats, s, config: ModelConfig) -> ModelParams:
    """Exact maximiser of the expected complete log-likelihood given ``s``."""
    s = np.asarray(s, dtype=float)
    n, K = s.shape
    if K != config.K:
        raise ValueError(f"responsibilities have {K} columns, config has K={config.K}")
    config.check_feasible(stats.d)
    mass = s.sum(axis=0)
    thr = empty_threshold(n, K)
    for k in range(K):
        if mass[k] < thr:
            raise EmptyClusterError(k, mass[k], thr)
    T, mu, var = [], [], []
    for k in range(K):
        w = s[:, k]
        W1, W2 = stats.weighted(w)
        table = segcost._table(W1, W2, mass[k], stats.var_floor, config.min_segment_len)
        Tk, _ = dp_segment(table, config.L[k], config.min_segment_len)
        a, b = Tk[:-1], Tk[1:]
        m, v, _ = segcost._solve(mass[k], (b - a)[:, None], W1[b] - W1[a], W2[b] - W2[a], stats.var_floor)
        T.append(Tk)
        mu.append(m + stats.offset)
        var.append(v)
    return ModelParams(pi=mass / n, T=tuple(T), mu=tuple(mu), sigma=tuple(var))


def init_responsibilities(y, K: int, method: InitMethod, rng: np.random.Generator) -> np.ndarray:
    y = _as_array(y)
    n = y.shape[0]
    if method is InitMethod.RANDOM_RESP:
        return rng.dirichlet(np.ones(K), size=n)
    summary = y.mean(axis=1)
    _, labels = kmeans2(summary, K, minit="++", seed=rng)
    if K == 1:
        return np.ones((n, 1))
    s = np.full((n, K), 0.1 / (K - 1))
    s[np.arange(n), labels] = 0.9
    return s


@dataclass
class _Run:
    params: ModelParams
    s: np.ndarray
    trace: list
    n_iter: int
    converged: bool


def run_em(y, stats, config: ModelConfig, s0, em_config: EMConfig) -> _Run:
    """One EM run from initial responsibilities ``s0``.

    Raises :class:`EmptyClusterError` if a cluster empties.
    """
    s = np.asarray(s0, dtype=float)
    trace = []
    converged = False
    params = None
    it = 0
    for it in range(1, em_config.max_iter + 1):
        params = m_step(y, stats, s, config)
        s, ll = e_step_with_loglik(y, params)
        trace.append(ll)
        if len(trace) >= 2 and abs(trace[-1] - trace[-2]) <= em_config.rel_tol * abs(trace[-2]):
            converged = True
            break
    return _Run(params, s, trace, it, converged)


def _swap_refine(y, stats, config: ModelConfig, run: _Run, em_config: EMConfig, max_rounds: int = 10):
    """Hill-climb over which cluster carries which breakpoint count.

    Random restarts often separate the clusters correctly but pair them with
    the wrong ``L``; EM cannot undo that. Each move restarts EM from the
    current responsibilities with two columns of different ``L`` exchanged.
    """
    L = config.L
    pairs = [(a, b) for a in range(config.K) for b in range(a + 1, config.K) if L[a] != L[b]]
    accepted = 0
    for _ in range(max_rounds):
        improved = False
        for a, b in pairs:
            s0 = run.s.copy()
            s0[:, [a, b]] = s0[:, [b, a]]
            try:
                cand = run_em(y, stats, config, s0, em_config)
            except EmptyClusterError:
                continue
            if cand.trace[-1] > run.trace[-1] + em_config.rel_tol * abs(run.trace[-1]):
                run, improved = cand, True
                accepted += 1
        if not improved:
            break
    return run, accepted


def fit(y, config: ModelConfig, em_config: EMConfig = EMConfig(), init_resp=None) -> FitReport:
    """Multi-restart EM; keeps the run with the highest final log-likelihood.

    ``init_resp`` (optional) replaces the random initialisation of restart 0,
    which is how warm starts are passed in by the model search.
    """
    y = _as_array(y)
    n, d, _ = y.shape
    config.check_feasible(d)
    stats = segcost.build_stats(y)

    def one(r):
        if r == 0 and init_resp is not None:
            s0 = check_responsibilities(init_resp, tol=1e-8)
        else:
            s0 = init_responsibilities(y, config.K, em_config.init, substream(em_config.seed, "restart", r))
        try:
            return run_em(y, stats, config, s0, em_config)
        except EmptyClusterError as exc:
            log.debug("restart %d abandoned: %s", r, exc)
            return None

    if em_config.n_jobs > 1:
        with ThreadPoolExecutor(em_config.n_jobs) as pool:
            runs = list(pool.map(one, range(em_config.n_restarts)))
    else:
        runs = [one(r) for r in range(em_config.n_restarts)]

    ok = [(r, run) for r, run in enumerate(runs) if run is not None]
    if not ok:
        raise DegenerateFitError(
            f"all {em_config.n_restarts} restarts hit an empty cluster (K={config.K}, L={config.L})")
    best_r, best = max(ok, key=lambda item: item[1].trace[-1])
    swaps = 0
    if em_config.swap_refine:
        best, swaps = _swap_refine(y, stats, config, best, em_config)
    params, s = canonicalize(best.params, best.s)
    return FitReport(
        params=params,
        responsibilities=s,
        partition=hard_assign(s),
        loglik_trace=tuple(best.trace),
        n_iter=best.n_iter,
        converged=best.converged,
        extra={"best_restart": best_r, "degenerate_restarts": len(runs) - len(ok), "swaps": swaps},
    )

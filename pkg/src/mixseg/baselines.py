"""Reference methods that do only one of the two jobs.

``fit_simple_mix`` clusters the flattened coefficient vectors with a plain
diagonal Gaussian mixture (no time segmentation). ``fit_simple_seg``
segments the pooled data with one shared set of breakpoints (no clustering).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import segcost
from .em import EMConfig, DegenerateFitError, e_step_with_loglik, dp_segment, empty_threshold, _as_array
from .rng import substream
from .types import FitReport, ModelParams, hard_assign

log = logging.getLogger(__name__)

MIN_GOOD_RESTARTS = 10
MAX_RESTARTS = 100


class BaselineKind(str, Enum):
    SIMPLE_MIX = "simplemix"
    SIMPLE_SEG = "simpleseg"


@dataclass(frozen=True)
class SimpleMixParams:
    """Per-cluster mean of every (time, coefficient) cell and the cell variances."""

    pi: np.ndarray
    mu: np.ndarray      # (K, d, p)
    sigma: np.ndarray   # (K, d, p); identical rows when variances are shared

    def as_model_params(self) -> ModelParams:
        """View as one-segment-per-timepoint parameters (``L_k = d - 1``)."""
        K, d, _ = self.mu.shape
        T = tuple(np.arange(d + 1) for _ in range(K))
        return ModelParams(pi=self.pi, T=T, mu=tuple(self.mu), sigma=tuple(self.sigma))


def _mix_m_step(y, s, shared_variance, floor):
    n = y.shape[0]
    mass = s.sum(axis=0)
    thr = empty_threshold(n, s.shape[1])
    if np.any(mass < thr):
        return None
    mu = np.tensordot(s, y, axes=(0, 0)) / mass[:, None, None]
    dev = np.stack([np.tensordot(s[:, k], (y - mu[k]) ** 2, axes=(0, 0)) for k in range(s.shape[1])])
    if shared_variance:
        var = np.broadcast_to(dev.sum(axis=0) / n, mu.shape)
    else:
        var = dev / mass[:, None, None]
    var = np.maximum(var, floor)
    return SimpleMixParams(pi=mass / n, mu=mu, sigma=np.array(var))


def fit_simple_mix(y, K: int, em_config: EMConfig = EMConfig(), shared_variance: bool = True) -> FitReport:
    """Diagonal Gaussian mixture on the flattened ``d * p`` coefficients.

    Runs at least ``max(10, n_restarts)`` random restarts and keeps drawing new
    ones (up to 100 in total) while fewer than that many finished without an
    empty cluster. ``shared_variance`` ties each cell variance across clusters.
    """
    y = _as_array(y)
    n = y.shape[0]
    floor = segcost.variance_floor(y)
    want = max(MIN_GOOD_RESTARTS, em_config.n_restarts)
    best = None
    good = tried = 0
    while good < want and tried < MAX_RESTARTS:
        rng = substream(em_config.seed, "simplemix", tried)
        tried += 1
        s = rng.dirichlet(np.ones(K), size=n)
        trace = []
        params = None
        converged = False
        for it in range(1, em_config.max_iter + 1):
            params = _mix_m_step(y, s, shared_variance, floor)
            if params is None:
                break
            s, ll = e_step_with_loglik(y, params.as_model_params())
            trace.append(ll)
            if len(trace) >= 2 and abs(trace[-1] - trace[-2]) <= em_config.rel_tol * abs(trace[-2]):
                converged = True
                break
        if params is None:
            log.debug("simplemix restart %d hit an empty cluster", tried - 1)
            continue
        good += 1
        if best is None or trace[-1] > best[2][-1]:
            best = (params, s, trace, it, converged)
    if best is None:
        raise DegenerateFitError(f"all {tried} SimpleMix restarts hit an empty cluster")
    params, s, trace, it, converged = best
    return FitReport(params=params.as_model_params(), responsibilities=s, partition=hard_assign(s),
                     loglik_trace=tuple(trace), n_iter=it, converged=converged,
                     extra={"restarts": tried, "good_restarts": good})


def fit_simple_seg(y, total_breakpoints: int, min_segment_len: int = 1) -> np.ndarray:
    """One segmentation of the pooled data (unit weights); returns ``(0, ..., d)``."""
    y = _as_array(y)
    if total_breakpoints < 0:
        raise ValueError("total_breakpoints must be >= 0")
    stats = segcost.build_stats(y)
    table = segcost.cost_table(stats, np.ones(y.shape[0]), min_segment_len)
    T, _ = dp_segment(table, total_breakpoints, min_segment_len)
    return T

"""BIC and a local search over ``(K, L)``.

From the current configuration the search evaluates every neighbour:

* remove one cluster (its responsibility is spread evenly over the others),
* add one cluster with a single breakpoint,
* change one cluster's breakpoint count by one,

refits each with warm-started EM, and moves to the neighbour with the best
BIC. It stops when no neighbour improves or after ``budget`` sweeps.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .em import EMConfig, DegenerateFitError, fit, _as_array
from .rng import substream
from .types import FitReport, ModelConfig

log = logging.getLogger(__name__)


def bic(y, fit_report: FitReport, config: ModelConfig) -> float:
    """Penalised log-likelihood; larger is better."""
    n, d, p = _as_array(y).shape
    params = fit_report.params
    if params.K != config.K or tuple(sorted(params.L)) != config.L:
        raise ValueError("fit does not match the configuration")
    if params.d != d or params.p != p:
        raise ValueError("fit does not match the data shape")
    K = config.K
    ndp = n * d * p
    pen = (K - 1) / 2 * np.log(n) + K / 2 * np.log(ndp)
    for T in params.T:
        Lk = len(T) - 2
        seg = np.diff(T) / d * n * p
        pen += 0.5 * (3 * p * (Lk + 1) * np.log(ndp) + np.log(seg).sum())
    return float(fit_report.loglik - pen)


@dataclass
class SearchStep:
    config: ModelConfig
    bic: float
    move: str
    accepted: bool = False


@dataclass
class SelectionResult:
    best_config: ModelConfig
    best_fit: FitReport
    bic: float
    search_trace: list = field(default_factory=list)
    budget_exhausted: bool = False

    def to_dict(self) -> dict:
        return {
            "best_config": self.best_config.to_dict(),
            "best_fit": self.best_fit.to_dict(),
            "bic": self.bic,
            "budget_exhausted": self.budget_exhausted,
            "search_trace": [
                {"config": s.config.to_dict(), "bic": s.bic, "move": s.move, "accepted": s.accepted}
                for s in self.search_trace
            ],
        }


def _sorted_init(L_list, s):
    order = np.argsort(L_list, kind="stable")
    return ModelConfig(K=len(L_list), L=tuple(L_list)), s[:, order]


def _neighbours(cfg: ModelConfig, s: np.ndarray, d: int, p: int):
    """Yield ``(move, config, warm-start responsibilities)``."""
    L = list(cfg.L)
    K = cfg.K

    def allowed(L_new):
        return max(L_new) + 1 <= p and (max(L_new) + 1) * cfg.min_segment_len <= d

    if K > 1:
        for k in range(K):
            keep = [j for j in range(K) if j != k]
            init = s[:, keep] + s[:, [k]] / (K - 1)
            L_new = [L[j] for j in keep]
            yield f"remove cluster {k + 1}", *_sorted_init(L_new, init)
    L_new = L + [1]
    if allowed(L_new):
        # the worst-explained decile of rows seeds the new cluster
        n = s.shape[0]
        worst = np.argsort(s.max(axis=1), kind="stable")[: max(1, n // 10)]
        init = np.hstack([s, np.zeros((n, 1))])
        init[worst] = 0.1 * init[worst]
        init[worst, -1] = 0.9
        yield "add cluster", *_sorted_init(L_new, init)
    for k in range(K):
        for delta in (-1, 1):
            L_new = list(L)
            L_new[k] += delta
            if L_new[k] < 0 or not allowed(L_new):
                continue
            yield f"cluster {k + 1} L{delta:+d}", *_sorted_init(L_new, s)


def _with_min_len(cfg, min_len):
    return ModelConfig(K=cfg.K, L=cfg.L, min_segment_len=min_len)


def search(y, initial: ModelConfig, em_config: EMConfig = EMConfig(), budget: int = 20) -> SelectionResult:
    """Best-improvement local search over configurations; ``budget`` caps the sweeps."""
    y = _as_array(y)
    _, d, p = y.shape
    cur_cfg = initial
    cur_fit = fit(y, cur_cfg, replace(em_config, seed=_seed(em_config.seed, cur_cfg, "start")))
    cur_bic = bic(y, cur_fit, cur_cfg)
    trace = [SearchStep(cur_cfg, cur_bic, "initial", accepted=True)]
    exhausted = False
    for sweep in range(budget + 1):
        if sweep == budget:
            exhausted = True
            break
        best = None
        for move, cfg, init in _neighbours(cur_cfg, cur_fit.responsibilities, d, p):
            cfg = _with_min_len(cfg, initial.min_segment_len)
            sub = replace(em_config, seed=_seed(em_config.seed, cfg, move, sweep))
            try:
                f = fit(y, cfg, sub, init_resp=init)
            except DegenerateFitError as exc:
                log.debug("neighbour %s skipped: %s", move, exc)
                continue
            b = bic(y, f, cfg)
            trace.append(SearchStep(cfg, b, move))
            if best is None or b > best[0]:
                best = (b, cfg, f, len(trace) - 1)
        if best is None or best[0] <= cur_bic:
            break
        cur_bic, cur_cfg, cur_fit, idx = best
        trace[idx].accepted = True
        log.info("accepted %s (BIC %.3f)", trace[idx].move, cur_bic)
    return SelectionResult(cur_cfg, cur_fit, cur_bic, trace, exhausted)


def _seed(base, cfg, *tags) -> int:
    rng = substream(base, "search", cfg.K, *cfg.L, *[str(t) for t in tags])
    return int(rng.integers(2 ** 63))

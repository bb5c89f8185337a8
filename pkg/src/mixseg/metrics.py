"""Clustering and segmentation scores against a known ground truth."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.special import comb

from .types import ModelParams


def _labels(z) -> np.ndarray:
    z = np.asarray(z)
    if z.ndim != 1:
        raise ValueError("a partition must be a 1-d label vector")
    return z.astype(np.int64)


def contingency(z_true, z_hat, K: Optional[int] = None) -> np.ndarray:
    """``K x K`` table of co-occurrence counts for labels ``1..K``."""
    a, b = _labels(z_true), _labels(z_hat)
    if a.shape != b.shape:
        raise ValueError(f"partitions differ in length: {a.size} vs {b.size}")
    K = K or int(max(a.max(initial=1), b.max(initial=1)))
    if a.min(initial=1) < 1 or b.min(initial=1) < 1 or a.max(initial=1) > K or b.max(initial=1) > K:
        raise ValueError(f"labels must lie in 1..{K}")
    table = np.zeros((K, K), dtype=np.int64)
    np.add.at(table, (a - 1, b - 1), 1)
    return table


def ari(z_true, z_hat) -> float:
    """Adjusted Rand index from pair counts (1 for identical partitions).

    When both partitions are a single block the index is undefined; we return
    1 if they agree exactly and 0 otherwise.
    """
    a, b = _labels(z_true), _labels(z_hat)
    if a.shape != b.shape:
        raise ValueError(f"partitions differ in length: {a.size} vs {b.size}")
    _, ai = np.unique(a, return_inverse=True)
    _, bi = np.unique(b, return_inverse=True)
    table = np.zeros((ai.max() + 1, bi.max() + 1), dtype=np.int64)
    np.add.at(table, (ai, bi), 1)
    n = a.size
    pairs = comb(table, 2).sum()
    rows = comb(table.sum(axis=1), 2).sum()
    cols = comb(table.sum(axis=0), 2).sum()
    total = comb(n, 2)
    expected = rows * cols / total if total else 0.0
    top = 0.5 * (rows + cols)
    if top == expected:
        return 1.0 if pairs == top else 0.0
    return float((pairs - expected) / (top - expected))


def optimal_permutation(z_true, z_hat, K: int) -> tuple[np.ndarray, int]:
    """Label matching that maximises agreement.

    Returns ``(perm, mismatches)`` where ``perm[k]`` is the 0-based estimated
    cluster matched to true cluster ``k``.
    """
    table = contingency(z_true, z_hat, K)
    rows, cols = linear_sum_assignment(table, maximize=True)
    perm = np.empty(K, dtype=np.int64)
    perm[rows] = cols
    agree = int(table[rows, cols].sum())
    return perm, int(table.sum()) - agree


def nce(z_true, z_hat, K: int) -> float:
    """Smallest misclassification rate over label permutations (0 is perfect)."""
    _, miss = optimal_permutation(z_true, z_hat, K)
    return miss / len(z_true)


def hausdorff(T_true, T_hat, d: int, permutation) -> Optional[float]:
    """Largest normalised deviation between aligned interior breakpoints.

    ``T_hat[permutation[k]]`` is compared with ``T_true[k]``. Returns ``None``
    when an aligned pair has different breakpoint counts.
    """
    worst = 0.0
    for k, kh in enumerate(permutation):
        a, b = np.asarray(T_true[k]), np.asarray(T_hat[kh])
        if a.shape != b.shape:
            return None
        if a.size > 2:
            worst = max(worst, float(np.abs(a[1:-1] - b[1:-1]).max()) / d)
    return worst


def hausdorff_nearest(T_true, breakpoints, d: int) -> float:
    """Largest normalised distance from a true breakpoint to the nearest estimated one.

    Used for detectors that return one pooled breakpoint set.
    """
    est = np.asarray(breakpoints)
    inner = est[(est > 0) & (est < d)] if est.size else est
    worst = 0.0
    for t in T_true:
        t = np.asarray(t)[1:-1]
        if t.size == 0:
            continue
        if inner.size == 0:
            return 1.0
        worst = max(worst, float(np.abs(t[:, None] - inner[None, :]).min(axis=1).max()) / d)
    return worst


def param_errors(params_true: ModelParams, params_hat: ModelParams, permutation) -> list[np.ndarray]:
    """``|mu_hat - mu_true|`` per true cluster, each of shape ``(L_k + 1, p)``."""
    out = []
    for k, kh in enumerate(permutation):
        a, b = params_true.mu[k], params_hat.mu[kh]
        if a.shape != b.shape:
            raise ValueError(f"cluster {k + 1}: true mu shape {a.shape} vs estimated {b.shape}")
        out.append(np.abs(b - a))
    return out


def segment_labels(T) -> np.ndarray:
    T = np.asarray(T)
    return np.repeat(np.arange(1, len(T)), np.diff(T))


def segmentation_ari(T_true, T_hat, permutation) -> float:
    """Mean over clusters of the ARI between true and estimated time segment labels."""
    return float(np.mean([ari(segment_labels(T_true[k]), segment_labels(T_hat[kh]))
                          for k, kh in enumerate(permutation)]))


@dataclass
class EvalReport:
    ari: float
    nce: float
    hausdorff: Optional[float]
    mu_abs_errors: list = field(default_factory=list)
    permutation: list = field(default_factory=list)
    note: str = ""

    def to_dict(self) -> dict:
        return {
            "ari": self.ari,
            "nce": self.nce,
            "hausdorff": self.hausdorff,
            "mu_abs_errors": [np.asarray(e).tolist() for e in self.mu_abs_errors],
            "permutation": [int(k) + 1 for k in self.permutation],
            "note": self.note,
        }


def evaluate(z_true, params_true: ModelParams, z_hat, params_hat: ModelParams) -> EvalReport:
    K = params_true.K
    if params_hat.K != K:
        raise ValueError(f"true model has K={K}, estimate has K={params_hat.K}")
    perm, miss = optimal_permutation(z_true, z_hat, K)
    h = hausdorff(params_true.T, params_hat.T, params_true.d, perm)
    note = "" if h is not None else "breakpoint counts differ after alignment; Hausdorff distance undefined"
    try:
        errs = param_errors(params_true, params_hat, perm)
    except ValueError as exc:
        errs, note = [], (note + "; " if note else "") + str(exc)
    return EvalReport(ari=ari(z_true, z_hat), nce=miss / len(z_true), hausdorff=h,
                      mu_abs_errors=errs, permutation=perm.tolist(), note=note)

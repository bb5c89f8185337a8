"""Segment statistics and the per-cluster segment cost.

For a cluster with responsibilities ``w`` the cost of the segment covering
0-based indices ``t1 .. t2-1`` is

    min over (mu, var) of  sum_r [ a * log(var_r) + (1/var_r) * sum_{i,j} w_i (y_ijr - mu_r)^2 ]

with ``a = sum(w) * (t2 - t1)``. The minimiser is the weighted mean and the
weighted mean squared deviation around it, floored at ``var_floor``.

Prefix sums over time make every weighted segment moment an O(p) lookup once
the responsibilities have been folded in (O(ndp) per cluster).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .types import CoefficientTensor

FLOOR_SCALE = 1e-8


@dataclass(frozen=True)
class SegmentStats:
    """Cumulative sums of ``y - offset`` and its square along the time axis.

    ``cum1`` and ``cum2`` have shape ``(n, d + 1, p)`` with a leading zero
    row. Centering by the per-coordinate ``offset`` keeps the variance
    computation well conditioned; it does not change any cost.
    """

    cum1: np.ndarray
    cum2: np.ndarray
    offset: np.ndarray
    var_floor: float

    @property
    def n(self) -> int:
        return self.cum1.shape[0]

    @property
    def d(self) -> int:
        return self.cum1.shape[1] - 1

    @property
    def p(self) -> int:
        return self.cum1.shape[2]

    def segment_means(self, t1: int, t2: int) -> np.ndarray:
        """Per-individual mean over the segment, shape ``(n, p)``."""
        return (self.cum1[:, t2] - self.cum1[:, t1]) / (t2 - t1) + self.offset

    def weighted(self, w) -> tuple[np.ndarray, np.ndarray]:
        """Responsibility-weighted prefix sums, each of shape ``(d + 1, p)``."""
        w = np.asarray(w, dtype=float)
        return np.tensordot(w, self.cum1, axes=(0, 0)), np.tensordot(w, self.cum2, axes=(0, 0))


@dataclass(frozen=True)
class SegmentFit:
    mu_hat: np.ndarray
    sigma_hat: np.ndarray
    cost: float


def variance_floor(y) -> float:
    v = float(np.var(np.asarray(y, dtype=float)))
    return FLOOR_SCALE * (v if v > 0 else 1.0)


def build_stats(y) -> SegmentStats:
    if isinstance(y, CoefficientTensor):
        y = y.y
    y = np.asarray(y, dtype=float)
    if y.ndim != 3:
        raise ValueError("expected an (n, d, p) tensor")
    offset = y.mean(axis=(0, 1))
    yc = y - offset
    n, d, p = y.shape
    cum1 = np.zeros((n, d + 1, p))
    cum2 = np.zeros((n, d + 1, p))
    np.cumsum(yc, axis=1, out=cum1[:, 1:])
    np.cumsum(yc * yc, axis=1, out=cum2[:, 1:])
    return SegmentStats(cum1=cum1, cum2=cum2, offset=offset, var_floor=variance_floor(y))


def _solve(total_w, length, s1, s2, floor):
    """Closed-form minimiser from weighted first/second moment sums (centered)."""
    a = total_w * length
    mu = s1 / a
    dev = np.maximum(s2 - a * mu * mu, 0.0)
    var = np.maximum(dev / a, floor)
    cost = (a * np.log(var) + dev / var).sum(axis=-1)
    return mu, var, cost


def segment_fit(stats: SegmentStats, weights, t1: int, t2: int) -> SegmentFit:
    if not 0 <= t1 < t2 <= stats.d:
        raise ValueError(f"invalid segment ({t1}, {t2}] for d={stats.d}")
    w = np.asarray(weights, dtype=float)
    total = w.sum()
    if not total > 0:
        raise ValueError("segment weights sum to zero")
    c1 = stats.cum1[:, t2] - stats.cum1[:, t1]
    c2 = stats.cum2[:, t2] - stats.cum2[:, t1]
    mu, var, cost = _solve(total, t2 - t1, w @ c1, w @ c2, stats.var_floor)
    return SegmentFit(mu_hat=mu + stats.offset, sigma_hat=var, cost=float(cost))


def cost_table(stats: SegmentStats, weights, min_segment_len: int = 1) -> np.ndarray:
    """All segment costs as a ``(d + 1, d + 1)`` matrix; ``inf`` where undefined.

    Entry ``[t1, t2]`` is finite only for ``t2 - t1 >= min_segment_len``.
    """
    w = np.asarray(weights, dtype=float)
    total = w.sum()
    if not total > 0:
        raise ValueError("segment weights sum to zero")
    W1, W2 = stats.weighted(w)
    return _table(W1, W2, total, stats.var_floor, min_segment_len)


@lru_cache(maxsize=32)
def _pairs(d, min_segment_len):
    t1, t2 = np.triu_indices(d + 1, k=min_segment_len)
    t1.flags.writeable = t2.flags.writeable = False
    return t1, t2, (t2 - t1)[:, None]


def _table(W1, W2, total, floor, min_segment_len):
    d = W1.shape[0] - 1
    t1, t2, length = _pairs(d, min_segment_len)
    out = np.full((d + 1, d + 1), np.inf)
    if t1.size:
        _, _, cost = _solve(total, length, W1[t2] - W1[t1], W2[t2] - W2[t1], floor)
        out[t1, t2] = cost
    return out


def fit_segments(stats: SegmentStats, weights, T) -> tuple[np.ndarray, np.ndarray]:
    """Closed-form ``(mu, var)`` for every segment of breakpoint vector ``T``."""
    w = np.asarray(weights, dtype=float)
    W1, W2 = stats.weighted(w)
    T = np.asarray(T)
    a, b = T[:-1], T[1:]
    mu, var, _ = _solve(w.sum(), (b - a)[:, None], W1[b] - W1[a], W2[b] - W2[a], stats.var_floor)
    return mu + stats.offset, var

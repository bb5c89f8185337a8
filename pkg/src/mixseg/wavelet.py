"""Orthonormal Haar pyramid transform.

All functions act on the last axis, so a whole ``(n, d, H)`` block can be
transformed at once.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .types import CoefficientTensor, FunctionalDataset

_SQRT2 = np.sqrt(2.0)


class WaveletFamily(str, Enum):
    HAAR = "haar"


@dataclass(frozen=True)
class WaveletConfig:
    level: int = 3
    family: WaveletFamily = WaveletFamily.HAAR

    def __post_init__(self):
        if self.level < 0:
            raise ValueError("level must be >= 0")
        if WaveletFamily(self.family) is not WaveletFamily.HAAR:
            raise ValueError("only the Haar family is supported")


def _check(x, level):
    x = np.asarray(x, dtype=float)
    H = x.shape[-1]
    if level < 0:
        raise ValueError("level must be >= 0")
    if H % (2 ** level):
        raise ValueError(f"signal length {H} is not divisible by 2**{level}")
    if not np.all(np.isfinite(x)):
        raise ValueError("signal contains non-finite values")
    return x


def _step(x):
    a, b = x[..., 0::2], x[..., 1::2]
    return (a + b) / _SQRT2, (a - b) / _SQRT2


def dwt_haar_full(signal, level: int):
    """Level-``level`` Haar decomposition.

    Returns ``(approx, details)`` where ``details[0]`` is the finest level
    (length ``H/2``) and ``details[-1]`` the coarsest.
    """
    approx = _check(signal, level)
    details = []
    for _ in range(level):
        approx, det = _step(approx)
        details.append(det)
    return approx, details


def dwt_haar_approx(signal, level: int) -> np.ndarray:
    """Approximation coefficients only, length ``H / 2**level``."""
    approx = _check(signal, level)
    for _ in range(level):
        approx = (approx[..., 0::2] + approx[..., 1::2]) / _SQRT2
    return approx


def idwt_haar(approx, details) -> np.ndarray:
    """Inverse of :func:`dwt_haar_full`."""
    x = np.asarray(approx, dtype=float)
    for det in reversed(details):
        det = np.asarray(det, dtype=float)
        if det.shape != x.shape:
            raise ValueError("detail and approximation shapes disagree")
        out = np.empty(x.shape[:-1] + (2 * x.shape[-1],))
        out[..., 0::2] = (x + det) / _SQRT2
        out[..., 1::2] = (x - det) / _SQRT2
        x = out
    return x


def project_dataset(ds: FunctionalDataset, cfg: WaveletConfig = WaveletConfig()) -> CoefficientTensor:
    H = ds.curves.shape[2]
    y = dwt_haar_approx(ds.curves, cfg.level)
    return CoefficientTensor(y=y, level=cfg.level, source_H=H)

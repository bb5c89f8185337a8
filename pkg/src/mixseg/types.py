"""Core value types for the mixture-of-segmentations model.

Conventions used throughout the package:

* ``sigma`` always holds **variances**, never standard deviations.
* Breakpoints are stored 0-based and exclusive: ``T[k]`` starts with 0 and
  ends with ``d``; segment ``l`` of cluster ``k`` covers the 0-based time
  indices ``T[k][l] .. T[k][l+1] - 1``.
* Partitions use labels ``1..K``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Optional, Sequence

import numpy as np

PARAM_TOL = 1e-12


def _frozen(a, dtype=float) -> np.ndarray:
    arr = np.array(a, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class FunctionalDataset:
    """Raw curves of shape ``(n, d, H)``: individuals x time units x samples."""

    curves: np.ndarray
    time_labels: Optional[tuple[str, ...]] = None

    def __post_init__(self):
        curves = _frozen(self.curves)
        if curves.ndim != 3 or min(curves.shape) < 1:
            raise ValueError(f"curves must be a non-empty (n, d, H) array, got shape {curves.shape}")
        if not np.all(np.isfinite(curves)):
            raise ValueError("curves contain non-finite values")
        if self.time_labels is not None:
            labels = tuple(str(s) for s in self.time_labels)
            if len(labels) != curves.shape[1]:
                raise ValueError("time_labels must have one entry per time unit")
            object.__setattr__(self, "time_labels", labels)
        object.__setattr__(self, "curves", curves)

    @property
    def shape(self):
        return self.curves.shape


@dataclass(frozen=True)
class CoefficientTensor:
    """Observed coefficients ``y`` of shape ``(n, d, p)``."""

    y: np.ndarray
    level: int = 0
    source_H: Optional[int] = None

    def __post_init__(self):
        y = _frozen(self.y)
        if y.ndim != 3 or min(y.shape) < 1:
            raise ValueError(f"y must be a non-empty (n, d, p) array, got shape {y.shape}")
        if not np.all(np.isfinite(y)):
            raise ValueError("coefficient tensor contains non-finite values")
        if self.level < 0:
            raise ValueError("level must be non-negative")
        if self.source_H is not None and self.source_H != y.shape[2] * 2 ** self.level:
            raise ValueError("p must equal source_H / 2**level")
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.y.shape[0]

    @property
    def d(self) -> int:
        return self.y.shape[1]

    @property
    def p(self) -> int:
        return self.y.shape[2]


@dataclass(frozen=True)
class ModelConfig:
    """Number of clusters and per-cluster breakpoint counts.

    ``L`` is stored sorted in non-decreasing order (canonical labeling).
    """

    K: int
    L: tuple[int, ...]
    min_segment_len: int = 1

    def __post_init__(self):
        L = tuple(int(x) for x in self.L)
        if self.K < 1:
            raise ValueError("K must be >= 1")
        if len(L) != self.K:
            raise ValueError(f"L must have K={self.K} entries, got {len(L)}")
        if any(x < 0 for x in L):
            raise ValueError("breakpoint counts must be non-negative")
        if self.min_segment_len < 1:
            raise ValueError("min_segment_len must be >= 1")
        object.__setattr__(self, "L", tuple(sorted(L)))

    def check_feasible(self, d: int) -> None:
        worst = max(self.L)
        if (worst + 1) * self.min_segment_len > d:
            raise ValueError(
                f"{worst + 1} segments of length >= {self.min_segment_len} do not fit in d={d}")

    def to_dict(self) -> dict:
        return {"K": self.K, "L": list(self.L), "min_segment_len": self.min_segment_len}

    @classmethod
    def from_dict(cls, obj: dict) -> "ModelConfig":
        return cls(K=int(obj["K"]), L=tuple(obj["L"]), min_segment_len=int(obj.get("min_segment_len", 1)))


@dataclass(frozen=True)
class ModelParams:
    """Mixture weights, per-cluster breakpoints and per-segment Gaussian parameters.

    ``T[k]`` has length ``L_k + 2``; ``mu[k]`` and ``sigma[k]`` have shape
    ``(L_k + 1, p)``. ``sigma`` holds variances.
    """

    pi: np.ndarray
    T: tuple[np.ndarray, ...]
    mu: tuple[np.ndarray, ...]
    sigma: tuple[np.ndarray, ...]

    def __post_init__(self):
        pi = _frozen(self.pi)
        T = tuple(_frozen(t, dtype=np.int64) for t in self.T)
        mu = tuple(_frozen(np.atleast_2d(m)) for m in self.mu)
        sigma = tuple(_frozen(np.atleast_2d(s)) for s in self.sigma)
        K = pi.shape[0]
        if pi.ndim != 1 or not (len(T) == len(mu) == len(sigma) == K):
            raise ValueError("pi, T, mu and sigma must all describe the same K clusters")
        p = mu[0].shape[1]
        d = int(T[0][-1])
        for k in range(K):
            nseg = len(T[k]) - 1
            if nseg < 1 or T[k][0] != 0 or T[k][-1] != d:
                raise ValueError(f"T[{k}] must start at 0 and end at d={d}")
            if np.any(np.diff(T[k]) <= 0):
                raise ValueError(f"T[{k}] must be strictly increasing")
            if mu[k].shape != (nseg, p) or sigma[k].shape != (nseg, p):
                raise ValueError(f"mu[{k}]/sigma[{k}] must have shape ({nseg}, {p})")
            if np.any(sigma[k] <= 0) or not np.all(np.isfinite(sigma[k])):
                raise ValueError(f"sigma[{k}] must be finite and positive")
            if not np.all(np.isfinite(mu[k])):
                raise ValueError(f"mu[{k}] must be finite")
        if np.any(pi < 0) or abs(pi.sum() - 1.0) > 1e-12 * max(1, K):
            raise ValueError("pi must be a probability vector")
        object.__setattr__(self, "pi", pi)
        object.__setattr__(self, "T", T)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "sigma", sigma)

    @property
    def K(self) -> int:
        return self.pi.shape[0]

    @property
    def d(self) -> int:
        return int(self.T[0][-1])

    @property
    def p(self) -> int:
        return self.mu[0].shape[1]

    @property
    def L(self) -> tuple[int, ...]:
        return tuple(len(t) - 2 for t in self.T)

    def expanded(self) -> tuple[np.ndarray, np.ndarray]:
        """Per-timepoint mean and variance arrays, each of shape ``(K, d, p)``."""
        seg = [np.repeat(np.arange(len(t) - 1), np.diff(t)) for t in self.T]
        mu = np.stack([m[s] for m, s in zip(self.mu, seg)])
        var = np.stack([v[s] for v, s in zip(self.sigma, seg)])
        return mu, var

    def permuted(self, order: Sequence[int]) -> "ModelParams":
        order = list(order)
        return ModelParams(
            pi=self.pi[order],
            T=tuple(self.T[k] for k in order),
            mu=tuple(self.mu[k] for k in order),
            sigma=tuple(self.sigma[k] for k in order),
        )

    def to_dict(self) -> dict:
        return {
            "pi": self.pi.tolist(),
            "T": [t.tolist() for t in self.T],
            "mu": [m.tolist() for m in self.mu],
            "sigma": [s.tolist() for s in self.sigma],
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "ModelParams":
        return cls(pi=obj["pi"], T=tuple(obj["T"]), mu=tuple(obj["mu"]), sigma=tuple(obj["sigma"]))


@dataclass(frozen=True)
class FitReport:
    params: ModelParams
    responsibilities: np.ndarray
    partition: np.ndarray
    loglik_trace: tuple[float, ...]
    n_iter: int
    converged: bool
    extra: dict[str, Any] = field(default_factory=dict, compare=False)

    @property
    def loglik(self) -> float:
        return self.loglik_trace[-1]

    def to_dict(self) -> dict:
        return {
            "params": self.params.to_dict(),
            "responsibilities": np.asarray(self.responsibilities).tolist(),
            "partition": np.asarray(self.partition).tolist(),
            "loglik_trace": list(self.loglik_trace),
            "n_iter": self.n_iter,
            "converged": self.converged,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "FitReport":
        return cls(
            params=ModelParams.from_dict(obj["params"]),
            responsibilities=np.asarray(obj["responsibilities"], dtype=float),
            partition=np.asarray(obj["partition"], dtype=np.int64),
            loglik_trace=tuple(float(v) for v in obj["loglik_trace"]),
            n_iter=int(obj["n_iter"]),
            converged=bool(obj["converged"]),
        )


@dataclass(frozen=True)
class Violation:
    """One failed identifiability assumption (``ID.1`` .. ``ID.4``)."""

    code: str
    message: str


def check_responsibilities(s, tol: float = 1e-10) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    if s.ndim != 2:
        raise ValueError("responsibilities must be an (n, K) matrix")
    if np.any(s < -tol) or np.any(s > 1 + tol):
        raise ValueError("responsibilities must lie in [0, 1]")
    if np.any(np.abs(s.sum(axis=1) - 1) > tol):
        raise ValueError("responsibility rows must sum to 1")
    return s


def hard_assign(s) -> np.ndarray:
    """Label each row by its most probable cluster (1-based, ties to the smallest index)."""
    s = check_responsibilities(s)
    return np.argmax(s, axis=1).astype(np.int64) + 1


def _same(a, b, tol=PARAM_TOL) -> bool:
    return bool(np.all(np.abs(np.asarray(a) - np.asarray(b)) <= tol))


def validate_params(params: ModelParams, config: ModelConfig, d: int, p: int,
                    tol: float = PARAM_TOL) -> list[Violation]:
    """List the identifiability assumptions violated by ``params``.

    An empty list means the configuration is identifiable. Inconsistent
    shapes raise ``ValueError`` instead of being reported as violations.
    """
    if params.K != config.K or tuple(sorted(params.L)) != config.L:
        raise ValueError(f"params describe K={params.K}, L={params.L}; config has K={config.K}, L={config.L}")
    if params.d != d or params.p != p:
        raise ValueError(f"params are for d={params.d}, p={params.p}; expected d={d}, p={p}")

    out = []
    for k in range(params.K):
        mu, var = params.mu[k], params.sigma[k]
        for l in range(len(mu) - 1):
            if _same(mu[l], mu[l + 1], tol) and _same(var[l], var[l + 1], tol):
                out.append(Violation("ID.1", f"cluster {k + 1}: segments {l} and {l + 1} share mean and variance"))
    if p < max(config.L) + 1:
        out.append(Violation("ID.2", f"p={p} < max L_k + 1 = {max(config.L) + 1}"))
    for k in range(params.K):
        for k2 in range(k + 1, params.K):
            if params.L[k] != params.L[k2]:
                continue
            if (np.array_equal(params.T[k], params.T[k2])
                    and _same(params.mu[k], params.mu[k2], tol)
                    and _same(params.sigma[k], params.sigma[k2], tol)):
                out.append(Violation("ID.3", f"clusters {k + 1} and {k2 + 1} are indistinguishable"))
    for k in range(params.K):
        if params.pi[k] <= 0:
            out.append(Violation("ID.4", f"cluster {k + 1} has weight {params.pi[k]} <= 0"))
    return out


def canonical_order(params: ModelParams) -> list[int]:
    """Cluster order sorting by breakpoint count, then first-segment mean."""
    keys = [(params.L[k], tuple(params.mu[k][0].tolist()), k) for k in range(params.K)]
    return [k for *_, k in sorted(keys)]


def canonicalize(params: ModelParams, s=None):
    """Reorder clusters canonically; returns ``(params, s)`` with ``s`` columns permuted alike."""
    order = canonical_order(params)
    out = params.permuted(order)
    if s is None:
        return out, None
    return out, np.asarray(s)[:, order]

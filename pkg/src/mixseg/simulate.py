"""Seeded data generators with ground truth.

Two scenarios are available:

* ``COSINE_DGP``: cluster ``k`` (1-based) draws, in its segment ``l``, the
  within-unit curve ``(-1)**k * alpha * cos(2*pi*t / (1 + l))`` plus white
  noise, sampled at ``H`` points per time unit.
* ``TOY_NEUTRAL_ACTIVE``: three clusters share three segments; cluster ``k``
  is "active" (N(2, 1)) in segment ``k`` and neutral (N(0, 0.1)) elsewhere.

Each individual has its own random substream, so the data do not depend on
generation order.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional

import numpy as np

from .rng import substream
from .types import FunctionalDataset, ModelConfig, ModelParams, validate_params
from .wavelet import dwt_haar_approx


class Scenario(str, Enum):
    COSINE_DGP = "cosine"
    TOY_NEUTRAL_ACTIVE = "toy"


class TimeGrid(str, Enum):
    # sample j = 1..H of a unit sits at t = j
    SAMPLE_INDEX = "sample_index"
    # sample j = 1..H of a unit sits at t = j / H on (0, 1]
    UNIT_INTERVAL = "unit_interval"


@dataclass(frozen=True)
class SimSpec:
    scenario: Scenario = Scenario.COSINE_DGP
    n: int = 100
    d: int = 50
    H: int = 32
    alpha: float = 1.0
    K: int = 3
    L: tuple[int, ...] = (1, 2, 3)
    pi: Optional[tuple[float, ...]] = None
    T: Optional[tuple[tuple[int, ...], ...]] = None
    noise_sd: float = 1.0
    seed: int = 0
    level: int = 3
    grid: TimeGrid = TimeGrid.UNIT_INTERVAL

    def __post_init__(self):
        object.__setattr__(self, "scenario", Scenario(self.scenario))
        object.__setattr__(self, "grid", TimeGrid(self.grid))
        object.__setattr__(self, "L", tuple(int(x) for x in self.L))
        if min(self.n, self.d, self.H, self.K) < 1:
            raise ValueError("n, d, H and K must be positive")
        if len(self.L) != self.K:
            raise ValueError("L must have K entries")
        if self.alpha < 0:
            raise ValueError("alpha must be >= 0")
        if self.noise_sd <= 0:
            raise ValueError("noise_sd must be > 0")
        if self.H % 2 ** self.level:
            raise ValueError(f"H={self.H} not divisible by 2**{self.level}")
        pi = self.pi if self.pi is not None else tuple([1.0 / self.K] * self.K)
        pi = tuple(float(x) for x in pi)
        if len(pi) != self.K or min(pi) <= 0 or abs(sum(pi) - 1) > 1e-9:
            raise ValueError("pi must be K positive weights summing to 1")
        object.__setattr__(self, "pi", pi)
        T = self.T if self.T is not None else tuple(even_breakpoints(self.d, l) for l in self.L)
        T = tuple(tuple(int(x) for x in t) for t in T)
        for t, l in zip(T, self.L):
            if len(t) != l + 2 or t[0] != 0 or t[-1] != self.d or any(b <= a for a, b in zip(t, t[1:])):
                raise ValueError(f"invalid breakpoints {t} for L={l}, d={self.d}")
        if len(T) != self.K:
            raise ValueError("T must have K entries")
        object.__setattr__(self, "T", T)

    @property
    def p(self) -> int:
        return self.H // 2 ** self.level

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario.value, "n": self.n, "d": self.d, "H": self.H,
            "alpha": self.alpha, "K": self.K, "L": list(self.L), "pi": list(self.pi),
            "T": [list(t) for t in self.T], "noise_sd": self.noise_sd, "seed": self.seed,
            "level": self.level, "grid": self.grid.value,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "SimSpec":
        obj = dict(obj)
        for key in ("L", "pi"):
            if obj.get(key) is not None:
                obj[key] = tuple(obj[key])
        if obj.get("T") is not None:
            obj["T"] = tuple(tuple(t) for t in obj["T"])
        return cls(**obj)


@dataclass(frozen=True)
class SimBundle:
    dataset: FunctionalDataset
    z_true: np.ndarray
    params_true: ModelParams
    spec: SimSpec
    violations: tuple = field(default=(), compare=False)

    def config(self) -> ModelConfig:
        return ModelConfig(K=self.spec.K, L=self.spec.L)

    def truth_dict(self) -> dict:
        return {
            "spec": self.spec.to_dict(),
            "z": self.z_true.tolist(),
            "params": self.params_true.to_dict(),
        }


def even_breakpoints(d: int, L: int) -> tuple[int, ...]:
    """``L`` breakpoints splitting ``d`` units into equal parts, rounded down."""
    return tuple((l * d) // (L + 1) for l in range(L + 2))


def cosine_curve(k: int, l: int, alpha: float, H: int, grid: TimeGrid = TimeGrid.UNIT_INTERVAL) -> np.ndarray:
    """Noiseless within-unit curve of cluster ``k`` (1-based) in segment ``l``."""
    j = np.arange(1, H + 1, dtype=float)
    t = j if TimeGrid(grid) is TimeGrid.SAMPLE_INDEX else j / H
    return (-1) ** k * alpha * np.cos(2 * np.pi * t / (1 + l))


def _draw_labels(spec: SimSpec) -> np.ndarray:
    rng = substream(spec.seed, "simulate", "labels")
    return rng.choice(spec.K, size=spec.n, p=np.asarray(spec.pi)) + 1


def _segment_index(T, d):
    return np.repeat(np.arange(len(T) - 1), np.diff(T))


def _check(params, spec, strict):
    cfg = ModelConfig(K=spec.K, L=spec.L)
    found = tuple(validate_params(params, cfg, spec.d, spec.p))
    if found:
        msg = "; ".join(f"{v.code}: {v.message}" for v in found)
        if strict:
            raise ValueError(f"simulation parameters are not identifiable: {msg}")
        warnings.warn(f"simulation parameters are not identifiable: {msg}", stacklevel=3)
    return found


def generate_cosine(spec: SimSpec, strict: Optional[bool] = None) -> SimBundle:
    """Cosine data-generating process.

    ``strict`` (default: ``alpha > 0``) turns identifiability violations of
    the true parameters into a ``ValueError`` instead of a warning.
    """
    if spec.scenario is not Scenario.COSINE_DGP:
        raise ValueError("spec.scenario must be COSINE_DGP")
    if strict is None:
        strict = spec.alpha > 0
    z = _draw_labels(spec)
    # per (cluster, segment) noiseless curves, shape (L_k + 1, H)
    curves = [np.stack([cosine_curve(k + 1, l, spec.alpha, spec.H, spec.grid) for l in range(spec.L[k] + 1)])
              for k in range(spec.K)]
    seg = [_segment_index(t, spec.d) for t in spec.T]
    X = np.empty((spec.n, spec.d, spec.H))
    for i in range(spec.n):
        k = z[i] - 1
        rng = substream(spec.seed, "simulate", "individual", i)
        X[i] = curves[k][seg[k]] + spec.noise_sd * rng.standard_normal((spec.d, spec.H))
    mu = tuple(dwt_haar_approx(c, spec.level) for c in curves)
    sigma = tuple(np.full((spec.L[k] + 1, spec.p), spec.noise_sd ** 2) for k in range(spec.K))
    params = ModelParams(pi=np.asarray(spec.pi), T=spec.T, mu=mu, sigma=sigma)
    found = _check(params, spec, strict)
    return SimBundle(FunctionalDataset(X), z, params, spec, found)


TOY_NEUTRAL = (0.0, 0.1)
TOY_ACTIVE = (2.0, 1.0)


def toy_spec(**overrides) -> SimSpec:
    """Defaults of the neutral/active example: 60 curves, 30 units of 16 samples."""
    base = dict(scenario=Scenario.TOY_NEUTRAL_ACTIVE, n=60, d=30, H=16, K=3, L=(2, 2, 2), level=2, alpha=0.0)
    base.update(overrides)
    return SimSpec(**base)


def generate_toy(spec: Optional[SimSpec] = None) -> SimBundle:
    """Neutral/active example; cluster ``k`` is active in segment ``k`` only.

    Neutral cells are N(0, 0.1) and active cells N(2, 1) (second argument is
    the variance). Every cluster needs at least ``K`` segments.
    """
    spec = spec or toy_spec()
    if spec.scenario is not Scenario.TOY_NEUTRAL_ACTIVE:
        raise ValueError("spec.scenario must be TOY_NEUTRAL_ACTIVE")
    if min(spec.L) + 1 < spec.K:
        raise ValueError("each cluster needs at least K segments")
    z = _draw_labels(spec)
    seg = [_segment_index(t, spec.d) for t in spec.T]
    X = np.empty((spec.n, spec.d, spec.H))
    for i in range(spec.n):
        k = z[i] - 1
        rng = substream(spec.seed, "simulate", "individual", i)
        active = (seg[k] == k)[:, None]
        mean = np.where(active, TOY_ACTIVE[0], TOY_NEUTRAL[0])
        sd = np.sqrt(np.where(active, TOY_ACTIVE[1], TOY_NEUTRAL[1]))
        X[i] = mean + sd * rng.standard_normal((spec.d, spec.H))
    scale = 2 ** (spec.level / 2)
    mu, sigma = [], []
    for k in range(spec.K):
        act = np.arange(spec.L[k] + 1) == k
        mu.append(np.repeat(np.where(act, TOY_ACTIVE[0], TOY_NEUTRAL[0])[:, None] * scale, spec.p, axis=1))
        sigma.append(np.repeat(np.where(act, TOY_ACTIVE[1], TOY_NEUTRAL[1])[:, None], spec.p, axis=1))
    params = ModelParams(pi=np.asarray(spec.pi), T=spec.T, mu=tuple(mu), sigma=tuple(sigma))
    found = _check(params, spec, strict=False)
    return SimBundle(FunctionalDataset(X), z, params, spec, found)


def generate(spec: SimSpec) -> SimBundle:
    if spec.scenario is Scenario.COSINE_DGP:
        return generate_cosine(spec)
    return generate_toy(spec)


def with_seed(spec: SimSpec, seed: int) -> SimSpec:
    return replace(spec, seed=seed)

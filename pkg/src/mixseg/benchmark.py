"""Replicated simulation grids comparing MixSeg with the two baselines.

A grid is a JSON-able dict::

    {"settings": [[100, 50], [100, 100]], "alphas": [0.2, 1.0],
     "replicates": 20, "methods": ["mixseg", "simplemix", "simpleseg"],
     "seed": 0, "noise_sd": 1.0, "grid": "unit_interval",
     "em": {"n_restarts": 10, "max_iter": 200, "rel_tol": 1e-6}}

Every replicate draws its data and fit seeds from named substreams of the
base seed, so each cell is reproducible on its own.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import metrics
from .baselines import fit_simple_mix, fit_simple_seg
from .em import EMConfig, fit
from .rng import substream
from .simulate import SimSpec, generate_cosine
from .types import ModelConfig
from .wavelet import WaveletConfig, project_dataset

log = logging.getLogger(__name__)

METHODS = ("mixseg", "simplemix", "simpleseg")


@dataclass
class Replicate:
    n: int
    d: int
    alpha: float
    method: str
    replicate: int
    ari: float = math.nan
    nce: float = math.nan
    hausdorff: float = math.nan
    mu_errors: list = field(default_factory=list)   # (cluster, segment, coordinate, value)
    error: str = ""


def _seed(base, *parts) -> int:
    return int(substream(base, "benchmark", *[str(p) for p in parts]).integers(2 ** 63))


def default_grid() -> dict:
    return {
        "settings": [[100, 50]], "alphas": [1.0], "replicates": 20, "methods": ["mixseg"],
        "seed": 0, "noise_sd": 1.0, "grid": "unit_interval", "H": 32, "level": 3,
        "K": 3, "L": [1, 2, 3], "em": {},
    }


def pooled_breakpoint_count(T) -> int:
    """Number of distinct interior breakpoints across clusters."""
    return len({int(t) for Tk in T for t in Tk[1:-1]})


def run_replicate(grid: dict, n: int, d: int, alpha: float, rep: int, methods) -> list[Replicate]:
    g = {**default_grid(), **grid}
    spec = SimSpec(n=n, d=d, alpha=alpha, H=g["H"], level=g["level"], K=g["K"], L=tuple(g["L"]),
                   noise_sd=g["noise_sd"], grid=g["grid"], seed=_seed(g["seed"], n, d, alpha, rep, "data"))
    bundle = generate_cosine(spec)
    y = project_dataset(bundle.dataset, WaveletConfig(g["level"]))
    em_cfg = EMConfig(**{**g["em"], "seed": _seed(g["seed"], n, d, alpha, rep, "fit")})
    truth = bundle.params_true
    out = []
    for method in methods:
        r = Replicate(n, d, alpha, method, rep)
        try:
            if method == "mixseg":
                f = fit(y, ModelConfig(spec.K, spec.L), em_cfg)
                ev = metrics.evaluate(bundle.z_true, truth, f.partition, f.params)
                r.ari, r.nce = ev.ari, ev.nce
                r.hausdorff = math.nan if ev.hausdorff is None else ev.hausdorff
                for k, err in enumerate(ev.mu_abs_errors):
                    for (l, c), v in np.ndenumerate(err):
                        r.mu_errors.append((k + 1, l, c + 1, float(v)))
            elif method == "simplemix":
                f = fit_simple_mix(y, spec.K, em_cfg)
                r.ari = metrics.ari(bundle.z_true, f.partition)
                r.nce = metrics.nce(bundle.z_true, f.partition, spec.K)
            elif method == "simpleseg":
                T = fit_simple_seg(y, pooled_breakpoint_count(truth.T))
                r.hausdorff = metrics.hausdorff_nearest(truth.T, T, d)
            else:
                raise ValueError(f"unknown method {method!r}")
        except Exception as exc:  # recorded per cell; the grid keeps going
            log.warning("n=%d d=%d alpha=%g rep=%d %s failed: %s", n, d, alpha, rep, method, exc)
            r.error = f"{type(exc).__name__}: {exc}"
        out.append(r)
    return out


def _task(args):
    return run_replicate(*args)


def run_grid(grid: dict, jobs: int = 1) -> list[Replicate]:
    g = {**default_grid(), **grid}
    methods = list(g["methods"])
    for m in methods:
        if m not in METHODS:
            raise ValueError(f"unknown method {m!r}; choose from {METHODS}")
    tasks = [(g, int(n), int(d), float(a), rep, methods)
             for n, d in g["settings"] for a in g["alphas"] for rep in range(int(g["replicates"]))]
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as pool:
            chunks = list(pool.map(_task, tasks))
    else:
        chunks = [_task(t) for t in tasks]
    return [r for chunk in chunks for r in chunk]


def _mean_std(vals):
    v = np.asarray([x for x in vals if not math.isnan(x)], dtype=float)
    if v.size == 0:
        return math.nan, math.nan
    return float(v.mean()), float(v.std()) if v.size > 1 else 0.0


def summarize(reps: list[Replicate]) -> list[dict]:
    """One row per (n, d, alpha, method) with mean/std of each metric."""
    cells = {}
    for r in reps:
        cells.setdefault((r.n, r.d, r.alpha, r.method), []).append(r)
    rows = []
    for (n, d, a, m), rs in cells.items():
        row = {"n": n, "d": d, "alpha": a, "method": m}
        for metric in ("ari", "nce", "hausdorff"):
            mean, std = _mean_std([getattr(r, metric) for r in rs])
            row[f"{metric}_mean"], row[f"{metric}_std"] = mean, std
        errs = [e[3] for r in rs for e in r.mu_errors]
        row["mu_error_median"] = float(np.median(errs)) if errs else math.nan
        row["replicates"] = len(rs)
        row["failures"] = sum(1 for r in rs if r.error)
        rows.append(row)
    return rows


SUMMARY_COLUMNS = ["n", "d", "alpha", "method", "ari_mean", "ari_std", "nce_mean", "nce_std",
                   "hausdorff_mean", "hausdorff_std", "mu_error_median", "replicates", "failures"]
PLOT_COLUMNS = ["n", "d", "alpha", "method", "replicate", "metric", "cluster", "segment", "coordinate", "value"]


def plot_rows(reps: list[Replicate]):
    """Long-form per-replicate values for boxplots (one row per value)."""
    for r in reps:
        base = [r.n, r.d, r.alpha, r.method, r.replicate]
        for metric in ("ari", "nce", "hausdorff"):
            v = getattr(r, metric)
            if not math.isnan(v):
                yield base + [metric, "", "", "", v]
        for k, l, c, v in r.mu_errors:
            yield base + ["mu_error", k, l, c, v]

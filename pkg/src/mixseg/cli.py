"""Command-line interface.

Exit codes: 0 success, 1 numerical/degenerate failure, 2 usage or input error.

Every subcommand accepts ``--config FILE.json``; keys (with ``-`` spelled as
``_``) provide defaults that explicit flags override.
"""

from __future__ import annotations

import argparse
import csv
import io as _io
import json
import logging
import sys
from pathlib import Path

from . import benchmark, io, metrics
from .baselines import fit_simple_mix
from .em import DegenerateFitError, EMConfig, fit
from .selection import search
from .simulate import Scenario, SimSpec, generate, toy_spec
from .types import FitReport, ModelConfig, ModelParams
from .wavelet import WaveletConfig, project_dataset

log = logging.getLogger("mixseg")


class UsageError(Exception):
    pass


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in str(text).replace(" ", "").split(",") if x != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _add_em_flags(p):
    p.add_argument("--max-iter", type=int, default=200)
    p.add_argument("--rel-tol", type=float, default=1e-6)
    p.add_argument("--restarts", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--init", choices=["random_resp", "kmeans_summary"], default="random_resp")
    p.add_argument("--jobs", type=int, default=1)


def _em_config(a) -> EMConfig:
    return EMConfig(max_iter=a.max_iter, rel_tol=a.rel_tol, n_restarts=a.restarts,
                    seed=a.seed, init=a.init, n_jobs=a.jobs)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mixseg", description="Mixture of segmentations for functional data.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a simulated dataset with ground truth")
    p.add_argument("--config")
    p.add_argument("--scenario", choices=[s.value for s in Scenario])
    p.add_argument("--n", type=int)
    p.add_argument("--d", type=int)
    p.add_argument("--H", type=int)
    p.add_argument("--alpha", type=float)
    p.add_argument("--K", type=int)
    p.add_argument("--L", type=_int_list)
    p.add_argument("--noise-sd", type=float)
    p.add_argument("--grid", choices=["unit_interval", "sample_index"])
    p.add_argument("--level", type=int, help="wavelet level used for the true coefficients")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--prefix", default="")
    p.set_defaults(func=cmd_simulate, required=["scenario"])

    p = sub.add_parser("project", help="Haar-project a dataset CSV to a coefficient CSV")
    p.add_argument("--config")
    p.add_argument("input")
    p.add_argument("--level", type=int, default=3)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_project)

    p = sub.add_parser("fit", help="fit the model with known K and L")
    p.add_argument("--config")
    p.add_argument("input", help="coefficient CSV")
    p.add_argument("--K", type=int)
    p.add_argument("--L", type=_int_list)
    p.add_argument("--min-segment-len", type=int, default=1)
    p.add_argument("--method", choices=["mixseg", "simplemix"], default="mixseg")
    _add_em_flags(p)
    p.add_argument("--report", required=True, help="FitReport JSON output")
    p.add_argument("--partition", help="partition CSV output")
    p.set_defaults(func=cmd_fit, required=["K"])

    p = sub.add_parser("select", help="choose K and L by BIC local search")
    p.add_argument("--config")
    p.add_argument("input", help="coefficient CSV")
    p.add_argument("--K", type=int, default=1)
    p.add_argument("--L", type=_int_list)
    p.add_argument("--min-segment-len", type=int, default=1)
    p.add_argument("--budget", type=int, default=20)
    _add_em_flags(p)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("evaluate", help="score a fit against simulation truth")
    p.add_argument("--config")
    p.add_argument("truth", help="truth JSON written by simulate")
    p.add_argument("fit", help="FitReport JSON written by fit")
    p.add_argument("-o", "--output", help="EvalReport JSON (default: stdout)")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("benchmark", help="run a replicated simulation grid")
    p.add_argument("--config", help="grid JSON")
    p.add_argument("--settings", help="n:d pairs, e.g. 100:50,100:100")
    p.add_argument("--alphas", help="comma-separated amplitudes")
    p.add_argument("--replicates", type=int)
    p.add_argument("--methods", help="comma-separated subset of mixseg,simplemix,simpleseg")
    p.add_argument("--seed", type=int)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--results", required=True, help="summary CSV output")
    p.add_argument("--plot-data", help="long-form per-replicate CSV output")
    p.set_defaults(func=cmd_benchmark, grid_config=True)
    return parser


def _apply_config(parser, argv):
    """Re-parse with defaults taken from ``--config`` (flags still win)."""
    args = parser.parse_args(argv)
    if getattr(args, "config", None) and not getattr(args, "grid_config", False):
        try:
            cfg = io.read_json(args.config)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
        sub = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest for a in sub._actions}
        unknown = set(cfg) - known
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        for key in ("L",):
            if key in cfg and isinstance(cfg[key], str):
                cfg[key] = _int_list(cfg[key])
        sub.set_defaults(**cfg)
        args = parser.parse_args(argv)
    for key in getattr(args, "required", []):
        if getattr(args, key) is None:
            raise UsageError(f"missing required option --{key.replace('_', '-')}")
    return args


def cmd_simulate(a) -> int:
    fields = {k: getattr(a, k) for k in ("n", "d", "H", "alpha", "K", "noise_sd", "grid", "level")
              if getattr(a, k) is not None}
    if a.L is not None:
        fields["L"] = tuple(a.L)
    if a.scenario == Scenario.TOY_NEUTRAL_ACTIVE.value:
        spec = toy_spec(seed=a.seed, **fields)
    else:
        spec = SimSpec(scenario=a.scenario, seed=a.seed, **fields)
    bundle = generate(spec)
    out = Path(a.out)
    io.atomic_write(out / f"{a.prefix}dataset.csv", io.dataset_to_csv(bundle.dataset))
    io.write_json(out / f"{a.prefix}truth.json", bundle.truth_dict())
    print(f"seed={spec.seed}")
    return 0


def cmd_project(a) -> int:
    ds = io.read_dataset_csv(a.input)
    y = project_dataset(ds, WaveletConfig(a.level))
    io.atomic_write(a.output, io.coefficients_to_csv(y))
    return 0


def _config(a, y) -> ModelConfig:
    L = a.L if a.L is not None else [1] * a.K
    if len(L) == 1 and a.K > 1:
        L = L * a.K
    cfg = ModelConfig(K=a.K, L=tuple(L), min_segment_len=a.min_segment_len)
    cfg.check_feasible(y.d)
    return cfg


def cmd_fit(a) -> int:
    y = io.read_coefficients_csv(a.input)
    if a.method == "simplemix":
        report = fit_simple_mix(y, a.K, _em_config(a))
    else:
        report = fit(y, _config(a, y), _em_config(a))
    io.write_json(a.report, report.to_dict())
    if a.partition:
        io.atomic_write(a.partition, io.partition_to_csv(report.partition))
    print(f"loglik={report.loglik!r} n_iter={report.n_iter} converged={report.converged}")
    return 0


def cmd_select(a) -> int:
    y = io.read_coefficients_csv(a.input)
    result = search(y, _config(a, y), _em_config(a), budget=a.budget)
    io.write_json(a.output, result.to_dict())
    print(f"K={result.best_config.K} L={list(result.best_config.L)} BIC={result.bic!r}")
    return 0


def cmd_evaluate(a) -> int:
    truth = io.read_json(a.truth)
    report = FitReport.from_dict(io.read_json(a.fit))
    params_true = ModelParams.from_dict(truth["params"])
    ev = metrics.evaluate(truth["z"], params_true, report.partition, report.params)
    text = io.dumps(ev.to_dict())
    if a.output:
        io.atomic_write(a.output, text)
    else:
        sys.stdout.write(text)
    return 0


def _csv_text(header, rows) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def cmd_benchmark(a) -> int:
    grid = benchmark.default_grid()
    if a.config:
        grid.update(io.read_json(a.config))
    if a.settings:
        grid["settings"] = [[int(x) for x in s.split(":")] for s in a.settings.split(",")]
    if a.alphas:
        grid["alphas"] = [float(x) for x in a.alphas.split(",")]
    if a.replicates is not None:
        grid["replicates"] = a.replicates
    if a.methods:
        grid["methods"] = a.methods.split(",")
    if a.seed is not None:
        grid["seed"] = a.seed
    reps = benchmark.run_grid(grid, jobs=a.jobs)
    rows = benchmark.summarize(reps)
    io.atomic_write(a.results, _csv_text(benchmark.SUMMARY_COLUMNS,
                                         ([r[c] for c in benchmark.SUMMARY_COLUMNS] for r in rows)))
    if a.plot_data:
        io.atomic_write(a.plot_data, _csv_text(benchmark.PLOT_COLUMNS, benchmark.plot_rows(reps)))
    for r in rows:
        print(f"({r['n']},{r['d']}) alpha={r['alpha']:g} {r['method']}: ARI {r['ari_mean']:.2f} "
              f"({r['ari_std']:.2f}) Hausdorff {r['hausdorff_mean']:.3f} failures={r['failures']}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"mixseg: error: {exc}", file=sys.stderr)
        return 2
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except DegenerateFitError as exc:
        print(f"mixseg: degenerate fit: {exc}", file=sys.stderr)
        return 1
    except (io.FormatError, ValueError, OSError) as exc:
        print(f"mixseg: error: {exc}", file=sys.stderr)
        return 2


def main_exit() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_exit()

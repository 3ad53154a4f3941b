"""Command-line entry point.

Subcommands:
  run          execute an experiment config and write records, tables, figures
  sweep        run a theta x c parameter grid for an MCC-family config
  compare      Mann-Whitney comparison of two record directories
  characterize export the Q-matrix / #strong structure trace of a config

Exit codes: 0 success, 2 configuration/usage error, 3 I/O error,
4 execution failure.
"""
from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import figures, harness
from .algorithms import MCC_FAMILY
from .stats import mann_whitney_u, significance_marker

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_RUN = 4


def _load_config(path: str, args) -> harness.ExperimentConfig:
    with open(path, "r", encoding="utf-8") as handle:
        config = harness.parse_config(handle.read())
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.out is not None:
        overrides["out"] = args.out
    if overrides:
        config = harness.ExperimentConfig(**{**config.to_dict(), **overrides})
        config.validate()
    return config


def _out_dir(config: harness.ExperimentConfig) -> str:
    out = config.out or "results"
    os.makedirs(out, exist_ok=True)
    return out


def _export(records, kind: str, path_base: str, fmt: str) -> None:
    if fmt == "json":
        harness.export_json(records, kind, path_base + ".json")
    else:
        harness.export_csv(records, kind, path_base + ".csv")


def _cmd_run(args) -> int:
    config = _load_config(args.config, args)
    out = _out_dir(config)
    records = harness.execute(config, jobs=args.jobs, out_dir=out)
    if not records:
        print("error: all runs failed; see failures.json", file=sys.stderr)
        return EXIT_RUN
    _export(records, "summary", os.path.join(out, "summary"), args.format)
    _export(records, "timing", os.path.join(out, "timing"), args.format)
    trace_dir = os.path.join(out, "traces")
    os.makedirs(trace_dir, exist_ok=True)
    for rec in records:
        _export([rec], "trace",
                os.path.join(trace_dir, f"trace_M{rec.pop_size}_r{rec.run_index:03d}"),
                args.format)
    figures.save_convergence_figure(records, os.path.join(out, "convergence.png"))
    if config.algorithm in MCC_FAMILY:
        figures.save_strong_count_figure(records, os.path.join(out, "strong_counts.png"))
    print(harness.format_summary(harness.report(records)))
    print(f"wrote {len(records)} records to {out}")
    return EXIT_OK


def _cmd_sweep(args) -> int:
    config = _load_config(args.config, args)
    out = _out_dir(config)
    theta_grid = [float(tok) for tok in args.theta.split(",") if tok]
    c_grid = [int(tok) for tok in args.c.split(",") if tok]
    cells = harness.sweep(config, theta_grid, c_grid, jobs=args.jobs, out_dir=out)
    if args.format == "json":
        import json

        with open(os.path.join(out, "sweep.json"), "w", encoding="utf-8") as handle:
            json.dump([cell.__dict__ for cell in cells], handle, indent=2)
    figures.save_sweep_figure(cells, os.path.join(out, "sweep.png"))
    print(harness.format_sweep(cells))
    print(f"wrote sweep grid to {out}")
    return EXIT_OK


def _best_sample(records):
    rep = harness.report(records)
    alg = rep.baseline_algorithm
    pop = rep.best_pop[alg]
    values = [harness.apply_zero_rule(rec.final_gap) for rec in records
              if rec.algorithm == alg and rec.pop_size == pop]
    return f"{alg} (M={pop})", values


def _cmd_compare(args) -> int:
    records_a = harness.load_records(args.dir_a)
    records_b = harness.load_records(args.dir_b)
    if not records_a or not records_b:
        print("error: both directories must contain run records", file=sys.stderr)
        return EXIT_CONFIG
    label_a, sample_a = _best_sample(records_a)
    label_b, sample_b = _best_sample(records_b)
    result = mann_whitney_u(sample_a, sample_b)
    marker = significance_marker(result.p_two_tailed, style="ascii")
    print(f"A: {label_a}  mean={np.mean(sample_a):.6e}  n={len(sample_a)}")
    print(f"B: {label_b}  mean={np.mean(sample_b):.6e}  n={len(sample_b)}")
    print(f"U={result.u_statistic:g}  p={result.p_two_tailed:.6e} "
          f"({result.method}) {marker}")
    if args.out is not None:
        os.makedirs(args.out, exist_ok=True)
        path = os.path.join(args.out, "compare.csv")
        with open(path, "w", encoding="utf-8") as handle:
            handle.write("side,label,runs,mean,u,p,method,marker\n")
            handle.write(f"A,{label_a},{len(sample_a)},{np.mean(sample_a):.17e},"
                         f"{result.u_statistic:.17e},{result.p_two_tailed:.17e},"
                         f"{result.method},{marker}\n")
            handle.write(f"B,{label_b},{len(sample_b)},{np.mean(sample_b):.17e},"
                         f"{result.u_statistic:.17e},{result.p_two_tailed:.17e},"
                         f"{result.method},{marker}\n")
        figures.save_compare_figure({label_a: sample_a, label_b: sample_b},
                                    os.path.join(args.out, "compare.png"))
        print(f"wrote comparison to {args.out}")
    return EXIT_OK


def _cmd_characterize(args) -> int:
    config = _load_config(args.config, args)
    if config.algorithm not in MCC_FAMILY:
        print(f"error: characterize requires an MCC-family algorithm, "
              f"got {config.algorithm!r}", file=sys.stderr)
        return EXIT_CONFIG
    out = _out_dir(config)
    records = harness.execute(config, jobs=args.jobs, out_dir=out)
    if not records:
        print("error: all runs failed; see failures.json", file=sys.stderr)
        return EXIT_RUN
    _export(records, "q_matrix", os.path.join(out, "q_matrix"), args.format)
    _export(records, "trace", os.path.join(out, "trace"), args.format)
    q = harness.accumulated_q_matrix(records)
    fes_axis = np.asarray(records[0].fes)
    figures.save_q_matrix_figure(q, os.path.join(out, "q_matrix.png"), fes_axis)
    figures.save_strong_count_figure(records, os.path.join(out, "strong_counts.png"))
    print(f"Q-matrix: {q.shape[0]} variables x {q.shape[1]} generations, "
          f"max count {int(q.max()) if q.size else 0}")
    print(f"wrote structure characterization to {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="edamcc",
                                     description="Gaussian EDA benchmark harness")
    sub = parser.add_subparsers(dest="command", required=True)

    def _common(p, with_config=True):
        if with_config:
            p.add_argument("config", help="experiment config file (key = value lines)")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--seed", type=int, default=None, help="root seed override")
        p.add_argument("--jobs", type=int, default=1, help="parallel run count")
        p.add_argument("--format", choices=("csv", "json"), default="csv",
                       help="table output format")

    p_run = sub.add_parser("run", help="execute a config and report")
    _common(p_run)
    p_run.set_defaults(func=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="theta x c parameter sweep")
    _common(p_sweep)
    p_sweep.add_argument("--theta", required=True, help="comma-separated theta grid")
    p_sweep.add_argument("--c", required=True, help="comma-separated c grid")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_cmp = sub.add_parser("compare", help="U-test between two record directories")
    p_cmp.add_argument("dir_a")
    p_cmp.add_argument("dir_b")
    p_cmp.add_argument("--out", default=None, help="output directory")
    p_cmp.add_argument("--format", choices=("csv", "json"), default="csv")
    p_cmp.set_defaults(func=_cmd_compare)

    p_char = sub.add_parser("characterize", help="Q-matrix / #strong export")
    _common(p_char)
    p_char.set_defaults(func=_cmd_characterize)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except harness.ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as err:
        print(f"i/o error: {err}", file=sys.stderr)
        return EXIT_IO
    except Exception as err:  # noqa: BLE001 - CLI boundary
        print(f"error: {err}", file=sys.stderr)
        return EXIT_RUN


if __name__ == "__main__":
    sys.exit(main())

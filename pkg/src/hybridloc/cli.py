"""Command-line interface: simulate, replay, and evaluate subcommands.

All subcommands take a config (file or named preset), an output directory,
and an optional seed override; given the same config and seed the emitted
CSVs are byte-identical across invocations.
"""

from __future__ import annotations

import argparse
import os
import re
import sys

import numpy as np

from .config import (ParseError, ValidationError, load_config, preset_config,
                     with_overrides)
from .evaluate import ecdf, summarize_errors, trajectory_errors
from .experiment import write_csv, rate_label, replay_records, run_experiment
from .measlog import MalformedLine, read_log


def _add_common(parser):
    group = parser.add_mutually_exclusive_group()
    group.add_argument("--config", help="path to a JSON config file")
    group.add_argument("--preset", help="named built-in config "
                                        "(paper-highrate, paper-lowrate)")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--seed", type=int, default=None,
                        help="override the config master seed")


def _load(args):
    if args.config:
        cfg = load_config(args.config)
    else:
        cfg = preset_config(args.preset or "paper-highrate")
    if args.seed is not None:
        cfg = with_overrides(cfg, {"seed": args.seed})
    return cfg


def _cmd_simulate(args):
    cfg = _load(args)
    if args.runs is not None:
        cfg = with_overrides(cfg, {"runs": args.runs})
    result = run_experiment(cfg, out_dir=args.out, jobs=args.jobs)
    for row in result.comparison:
        print(f"{row['label']}: n={row['n']} median={row['median_m']:.3f} m "
              f"p90={row['p90_m']:.3f} m")
    print(f"results written to {args.out}")
    return 0


def _cmd_replay(args):
    cfg = _load(args)
    if args.decimate is not None:
        cfg = with_overrides(cfg, {"schedule": {"decimation": args.decimate}})
    records = read_log(args.log)
    result = replay_records(cfg, records, out_dir=args.out)
    for row in result.comparison:
        print(f"{row['label']}: n={row['n']} median={row['median_m']:.3f} m "
              f"p90={row['p90_m']:.3f} m")
    print(f"results written to {args.out}")
    return 0


_TRAJ_NAME = re.compile(r"traj_(?P<kind>[a-z-]+)_run\d+\.csv$")


def _read_trajectory(path):
    with open(path, "r", newline="") as fh:
        header = fh.readline().strip().split(",")
        try:
            it, ix, iy = (header.index(c) for c in ("timestamp_s", "x_m", "y_m"))
        except ValueError:
            raise ValueError(f"{path}: not a trajectory CSV") from None
        rows = [line.strip().split(",") for line in fh if line.strip()]
    return np.array([[float(r[it]), float(r[ix]), float(r[iy])] for r in rows])


def _cmd_evaluate(args):
    cfg = _load(args)
    by_label: dict[str, list[np.ndarray]] = {}
    for path in args.traj:
        match = _TRAJ_NAME.search(os.path.basename(path))
        label = match.group("kind") if match else os.path.splitext(
            os.path.basename(path))[0]
        est = _read_trajectory(path)
        by_label.setdefault(label, []).append(
            trajectory_errors(est[:, 1:3], cfg.path))

    os.makedirs(args.out, exist_ok=True)
    label = rate_label(cfg.schedule)
    comparison = []
    for kind in sorted(by_label):
        errors = np.concatenate(by_label[kind])
        comparison.append(summarize_errors(kind, errors, cfg.thresholds))
        points = ecdf(errors).points()
        write_csv(os.path.join(args.out, f"ecdf_{kind}_{label}.csv"),
                   ["error", "F"],
                   ([repr(float(e)), repr(float(f))] for e, f in points))
    header = list(comparison[0].keys())
    write_csv(os.path.join(args.out, "comparison.csv"), header,
               ([row["label"], str(row["n"])]
                + [repr(float(row[k])) for k in header[2:]]
                for row in comparison))
    for row in comparison:
        print(f"{row['label']}: n={row['n']} median={row['median_m']:.3f} m "
              f"p90={row['p90_m']:.3f} m")
    print(f"results written to {args.out}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="hybridloc",
        description="Hybrid RSS/TDOA localization: simulate, replay, evaluate.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run a seeded Monte Carlo experiment")
    _add_common(p_sim)
    p_sim.add_argument("--runs", type=int, default=None,
                       help="override the config run count")
    p_sim.add_argument("--jobs", type=int, default=1,
                       help="worker processes for Monte Carlo runs")
    p_sim.set_defaults(func=_cmd_simulate)

    p_rep = sub.add_parser("replay", help="process a recorded measurement log")
    _add_common(p_rep)
    p_rep.add_argument("--log", required=True, help="measurement-log CSV")
    p_rep.add_argument("--decimate", type=int, default=None,
                       help="keep one UWB epoch in D (post-processing)")
    p_rep.set_defaults(func=_cmd_replay)

    p_eval = sub.add_parser("evaluate",
                            help="pool trajectory CSVs into ECDF and comparison")
    _add_common(p_eval)
    p_eval.add_argument("--traj", nargs="+", required=True,
                        help="trajectory CSV files (from simulate/replay)")
    p_eval.set_defaults(func=_cmd_evaluate)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, ValidationError, MalformedLine, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

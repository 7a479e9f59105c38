"""Command-line front end.

Exit codes: 0 success, 1 configuration or validation problem, 2 stage
failure (missing inputs, invariant breakage), 3 clustering did not settle
within its virtual-time budget.

Global flags may appear before or after the subcommand; flags override
the loaded config file.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace

from .config import ConfigError, RunConfig, config_to_text, load_config
from .floc import NonConvergenceError
from .pipeline import (
    CONFIG_TXT,
    StageError,
    _timed,
    _write_text,
    report_text,
    stage_cluster,
    stage_deploy,
    stage_evaluate,
    stage_train,
    sweep_cluster_sizes,
)

COMMANDS = ("deploy", "cluster", "train", "evaluate", "sweep", "report")


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--config", metavar="PATH", default=argparse.SUPPRESS,
        help="config file (section.key = value lines)",
    )
    common.add_argument(
        "--seed", type=int, metavar="U64", default=argparse.SUPPRESS,
        help="master seed, overrides run.seed",
    )
    common.add_argument(
        "--out", metavar="DIR", default=argparse.SUPPRESS,
        help="artifact directory, overrides run.out_dir",
    )
    common.add_argument(
        "--reward", choices=("cdpq", "expq"), default=argparse.SUPPRESS,
        help="reward kind, overrides reward.kind",
    )
    common.add_argument(
        "--eval-mode", choices=("in-cluster", "full-network"),
        default=argparse.SUPPRESS, dest="eval_mode",
        help="interference scope for evaluation",
    )

    parser = argparse.ArgumentParser(
        prog="mmwave-son",
        parents=[common],
        description="Self-organizing mmWave network simulator: deployment, "
        "clustering, learned power allocation, evaluation.",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    helps = {
        "deploy": "draw a station/user layout",
        "cluster": "run distributed clustering on the layout",
        "train": "train per-cluster power allocation",
        "evaluate": "score the trained powers",
        "sweep": "train both reward kinds over synthesized cluster sizes",
        "report": "summarize artifacts in the output directory",
    }
    for name in COMMANDS:
        cmd = sub.add_parser(name, parents=[common], help=helps[name])
        if name == "cluster":
            cmd.add_argument(
                "--unit-distance", type=float, metavar="M",
                default=argparse.SUPPRESS, dest="unit_distance",
                help="inner-band radius, overrides floc.unit_distance_m",
            )
            cmd.add_argument(
                "--outband-distance", type=float, metavar="M",
                default=argparse.SUPPRESS, dest="outband_distance",
                help="outer-band radius, overrides floc.outband_distance_m",
            )
            cmd.add_argument(
                "--arrival-window", type=float, metavar="S",
                default=argparse.SUPPRESS, dest="arrival_window",
                help="arrival spread in virtual seconds, overrides "
                "floc.arrival_window_s",
            )
    return parser


def resolve_config(args):
    cfg = RunConfig()
    config_path = getattr(args, "config", None)
    if config_path is not None:
        cfg = load_config(config_path)
    overrides = {}
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    if getattr(args, "out", None) is not None:
        overrides["out_dir"] = args.out
    if getattr(args, "reward", None) is not None:
        overrides["reward_kind"] = args.reward
    if getattr(args, "eval_mode", None) is not None:
        overrides["eval_mode"] = args.eval_mode.replace("-", "_")
    floc_overrides = {}
    if getattr(args, "unit_distance", None) is not None:
        floc_overrides["unit_distance_m"] = args.unit_distance
    if getattr(args, "outband_distance", None) is not None:
        floc_overrides["outband_distance_m"] = args.outband_distance
    if getattr(args, "arrival_window", None) is not None:
        floc_overrides["arrival_window_s"] = args.arrival_window
    if floc_overrides:
        overrides["floc"] = replace(cfg.floc, **floc_overrides)
    if overrides:
        cfg = replace(cfg, **overrides)
    cfg.validate()
    return cfg


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
    except (ConfigError, ValueError) as exc:
        print("validation error: %s" % exc, file=sys.stderr)
        return 1
    except OSError as exc:
        print("validation error: cannot read config: %s" % exc, file=sys.stderr)
        return 1

    out = cfg.out_dir
    try:
        if args.command == "report":
            sys.stdout.write(report_text(out))
            return 0

        os.makedirs(out, exist_ok=True)
        if args.command == "sweep":
            rows = sweep_cluster_sizes(cfg, out)
            print("sweep: %d cells ok -> %s" % (len(rows) // 2, out))
            return 0

        _write_text(out, CONFIG_TXT, config_to_text(cfg))
        if args.command == "deploy":
            layout = _timed(out, "deploy", stage_deploy, cfg, out)
            print("deploy: %d stations (seed %d) -> %s" % (
                layout.n_stations, cfg.seed, out))
        elif args.command == "cluster":
            assignment = _timed(out, "cluster", stage_cluster, cfg, out)
            print("cluster: %d clusters, converged at %.3f s -> %s" % (
                len(assignment.clusters), assignment.convergence_time, out))
        elif args.command == "train":
            results, _ = _timed(out, "train", stage_train, cfg, out)
            episodes = sum(r.record.episodes_run for r in results)
            print("train: %d clusters, %d episodes total (%s) -> %s" % (
                len(results), episodes, cfg.reward_kind, out))
        elif args.command == "evaluate":
            report = _timed(out, "evaluate", stage_evaluate, cfg, out)
            net = report.network
            print(
                "evaluate (%s): qos met %.1f%%, sum capacity %.3f -> %s"
                % (cfg.eval_mode, 100.0 * net["qos_met_fraction"],
                   net["sum_capacity"], out)
            )
        return 0
    except NonConvergenceError as exc:
        print("non-convergence: %s" % exc, file=sys.stderr)
        return 3
    except StageError as exc:
        print("%s" % exc, file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())

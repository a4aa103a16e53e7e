"""Command-line entry point.

Subcommands: train, navigate, maze, bench. Exit codes: 0 success,
2 usage/configuration error, 3 runtime abort, 4 infeasible task.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .config import ConfigError, RunConfig

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3
EXIT_INFEASIBLE = 4


def _load_config(path, seed=None, overrides=None):
    if path:
        cfg = RunConfig.load(path)
    else:
        cfg = RunConfig.defaults()
    values = dict(cfg.values)
    if seed is not None:
        values["seed"] = seed
    if overrides:
        values.update(overrides)
    cfg = RunConfig(values)
    cfg.validate()
    return cfg


def cmd_train(args) -> int:
    from .trainer import train

    cfg = _load_config(args.config, args.seed)
    workers = 1 if args.single_thread else None
    episodes = args.episodes

    def progress(res):
        if res.episode % 10 == 0 or res.aborted:
            print(
                f"episode {res.episode}: return {res.ret:.2f} steps {res.steps}"
                + (" [aborted]" if res.aborted else ""),
                flush=True,
            )

    try:
        train(cfg, args.out, seed=args.seed, episodes=episodes, workers=workers,
              progress=progress)
    except FloatingPointError as exc:
        print(f"training aborted: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    print(f"wrote {os.path.join(args.out, 'checkpoint.ckpt')}")
    return EXIT_OK


def _parse_pose(text):
    vals = [float(v) for v in text.split(",")]
    if len(vals) == 2:
        vals.append(0.0)
    if len(vals) != 3:
        raise ValueError("pose must be 'x,y' or 'x,y,heading'")
    return tuple(vals)


def _parse_cell(text):
    vals = [int(v) for v in text.split(",")]
    if len(vals) != 2:
        raise ValueError("cell must be 'cx,cy'")
    return (vals[0], vals[1])


def cmd_navigate(args) -> int:
    from .ddpg import CheckpointError, load_checkpoint
    from .navigator import NavigationTask, UnreachableGoalError, navigate
    from .planner import OccupancyGrid, OccupiedEndpointError, kruskal_maze
    from .sim import SimulationAborted

    cfg = _load_config(args.config, args.seed)
    try:
        agent = load_checkpoint(args.checkpoint)
    except CheckpointError as exc:
        print(f"bad checkpoint: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.maze:
        try:
            grid = OccupancyGrid.load(args.maze)
        except Exception as exc:
            print(f"cannot read maze file: {exc}", file=sys.stderr)
            return EXIT_CONFIG
    else:
        grid = kruskal_maze(args.width, args.height, args.random_maze,
                            cell_size=cfg["planner.cell_size"])
    if args.start:
        start = _parse_pose(args.start)
    else:
        first_free = grid.free_cells()[0]
        c = grid.cell_center(first_free)
        start = (float(c[0]), float(c[1]), 0.0)
    task = NavigationTask(
        grid=grid,
        start=start,
        goal_cell=_parse_cell(args.goal),
        arrival_radius=cfg["nav.arrival_radius"],
        time_budget=args.time_budget or cfg["nav.time_budget"],
    )
    try:
        trace, outcome = navigate(task, agent, cfg)
    except (UnreachableGoalError, OccupiedEndpointError) as exc:
        print(f"infeasible task: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except SimulationAborted as exc:
        print(f"simulation aborted: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    os.makedirs(args.out, exist_ok=True)
    trace.to_csv(os.path.join(args.out, "trace.csv"))
    trace.to_jsonl(os.path.join(args.out, "trace.jsonl"))
    with open(os.path.join(args.out, "outcome.json"), "w", encoding="utf-8") as fh:
        json.dump(outcome, fh, indent=1, sort_keys=True)
    print(f"outcome: {outcome['status']} after {outcome['time']:.1f} sim s "
          f"({outcome['waypoints_reached']}/{outcome['waypoints_total']} waypoints)")
    if outcome["status"] == "aborted":
        return EXIT_RUNTIME
    return EXIT_OK


def cmd_maze(args) -> int:
    from .planner import PlannerError, kruskal_maze

    cfg = _load_config(args.config, args.seed)
    try:
        grid = kruskal_maze(args.width, args.height, args.seed if args.seed is not None else cfg["seed"],
                            cell_size=args.cell_size or cfg["planner.cell_size"])
    except PlannerError as exc:
        print(f"bad maze dimensions: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    grid.save(args.out)
    print(f"wrote {args.out}")
    return EXIT_OK


def cmd_bench(args) -> int:
    from .bench import run_bench, save_report

    cfg = _load_config(args.config, args.seed)
    report = run_bench(cfg, seed=args.seed, steps=args.steps)
    text = save_report(report, args.out)
    print(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="slithernav",
                                description="slithering-robot navigation stack")
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("train", help="train the local-navigation policy")
    t.add_argument("--config", help="configuration file")
    t.add_argument("--out", required=True, help="output directory")
    t.add_argument("--seed", type=int, default=None)
    t.add_argument("--episodes", type=int, default=None)
    t.add_argument("--single-thread", action="store_true",
                   help="force the deterministic single-threaded reference mode")
    t.set_defaults(fn=cmd_train)

    n = sub.add_parser("navigate", help="plan and run a navigation task")
    n.add_argument("--config", help="configuration file")
    n.add_argument("--checkpoint", required=True, help="policy checkpoint")
    src = n.add_mutually_exclusive_group(required=True)
    src.add_argument("--maze", help="grid file (see docs/formats.md)")
    src.add_argument("--random-maze", type=int, metavar="SEED",
                     help="generate a maze from this seed")
    n.add_argument("--width", type=int, default=5, help="random maze cells in x")
    n.add_argument("--height", type=int, default=5, help="random maze cells in y")
    n.add_argument("--start", help="start pose 'x,y[,heading]' (world metres)")
    n.add_argument("--goal", required=True, help="goal cell 'cx,cy'")
    n.add_argument("--time-budget", type=float, default=None)
    n.add_argument("--out", required=True, help="output directory for traces")
    n.add_argument("--seed", type=int, default=None)
    n.set_defaults(fn=cmd_navigate)

    m = sub.add_parser("maze", help="generate a maze grid file")
    m.add_argument("--config", help="configuration file")
    m.add_argument("--width", type=int, required=True)
    m.add_argument("--height", type=int, required=True)
    m.add_argument("--seed", type=int, default=None)
    m.add_argument("--cell-size", type=float, default=None)
    m.add_argument("--out", required=True)
    m.set_defaults(fn=cmd_maze)

    b = sub.add_parser("bench", help="compare gait-parameter vs joint-space training cost")
    b.add_argument("--config", help="configuration file")
    b.add_argument("--steps", type=int, default=None, help="physics steps per mode")
    b.add_argument("--seed", type=int, default=None)
    b.add_argument("--out", required=True)
    b.set_defaults(fn=cmd_bench)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        print(f"missing file: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"bad argument: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())

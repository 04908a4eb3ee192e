"""Command line interface: run the protocol, dump fields, inspect goals,
replay trajectories and serve the human trial service."""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import acoustics, experiment
from .array_geometry import build_array, default_layout, load_layout
from .experiment import ExperimentConfig, export, load_config, run_set
from .trial_server import ServerConfig, run_server


def _config_from_args(args) -> ExperimentConfig:
    config = load_config(args.config) if args.config else ExperimentConfig()
    if getattr(args, "seed", None) is not None:
        config = replace(config, seed=args.seed)
    if getattr(args, "sets", None) is not None:
        config = replace(config, sets=args.sets)
    return config


def _cmd_run(args) -> int:
    config = _config_from_args(args)
    results, summary = run_set(config)
    paths = export(results, summary, args.out, write_trajectories=not args.no_trajectories)
    completed = sum(r.completed for r in results)
    print(f"trials: {len(results)}  completed: {completed}")
    if summary.median_eps_xyz is not None:
        print(f"median eps_xyz: {summary.median_eps_xyz:.2f} mm")
        print(f"median eps_xy:  {summary.median_eps_xy:.2f} mm")
        print(f"median duration: {summary.median_duration:.2f} s")
    for goal_id in sorted(summary.per_goal_rate):
        print(f"goal {goal_id:2d}: completion {summary.per_goal_rate[goal_id]:.2f}")
    for name, path in paths.items():
        print(f"wrote {name}: {path}")
    for r in results:
        if r.eps_xyz < 0 or r.eps_xy < 0 or r.duration > config.timeout + 1e-6:
            print(f"invariant violation in trial (goal {r.goal_id}, set {r.set_index})",
                  file=sys.stderr)
            return 1
    return 0


def _cmd_goals(args) -> int:
    config = _config_from_args(args)
    goals = config.goal_list()
    if args.json:
        payload = [{"id": g.goal_id, "label": g.label,
                    "position": [float(v) for v in g.position]} for g in goals]
        print(json.dumps(payload, indent=2))
    else:
        start = config.workspace.start_point
        print(f"start: ({start[0]:.1f}, {start[1]:.1f}, {start[2]:.1f}) mm")
        for g in goals:
            x, y, z = g.position
            print(f"goal {g.goal_id:2d}  {g.label:8s}  ({x:7.1f}, {y:7.1f}, {z:7.1f}) mm")
    return 0


def _cmd_field_dump(args) -> int:
    layout = load_layout(args.layout) if args.layout else default_layout()
    array = build_array(layout)
    focus = np.asarray([float(v) for v in args.focus.split(",")], dtype=float)
    if focus.shape != (3,) or focus[2] <= 0:
        print("focus must be x,y,z with z > 0", file=sys.stderr)
        return 1
    n = acoustics.dump_field_csv(array, focus, args.out,
                                 half_span=args.span, step=args.step)
    print(f"wrote {n} samples to {args.out}")
    return 0


def _cmd_replay(args) -> int:
    from .tracking import HandSample, read_trajectory_jsonl

    config = _config_from_args(args)
    goals = {g.goal_id: g for g in config.goal_list()}

    by_trial: dict[tuple[int, int], list[dict]] = {}
    for row in read_trajectory_jsonl(args.trajectories):
        key = (int(row["set"]), int(row["goal_id"]))
        by_trial.setdefault(key, []).append(row)
    if not by_trial:
        print("no trajectory rows found", file=sys.stderr)
        return 1
    print("set goal    eps_xyz    eps_xy  duration")
    for (set_index, goal_id), rows in sorted(by_trial.items()):
        goal = goals.get(goal_id)
        if goal is None:
            print(f"unknown goal id {goal_id}", file=sys.stderr)
            return 1
        samples = [HandSample(position=np.asarray(r["position"], float), timestamp=r["t"])
                   for r in sorted(rows, key=lambda r: r["t"])]
        cone = config.cone_for(goal)
        result = experiment.result_from_trajectory(
            cone, goal, samples, completed=True, duration=samples[-1].timestamp,
            set_index=set_index)
        print(f"{set_index:3d} {goal_id:4d}  {result.eps_xyz:9.3f} {result.eps_xy:9.3f} "
              f"{result.duration:9.3f}")
    return 0


def _cmd_serve(args) -> int:
    exp_config = _config_from_args(args)
    if args.config is None:
        exp_config = replace(exp_config, sets=1)
    server = ServerConfig(
        experiment=exp_config,
        scripted=args.scripted,
        physical_intensity=not args.no_intensity,
        log_dir=Path(args.log_dir) if args.log_dir else None,
    )
    static = Path(args.static) if args.static else None
    run_server(server, host=args.host, port=args.port, static_dir=static)
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="haptic-cone",
                                     description="haptic cone guidance simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run the full guidance protocol")
    p_run.add_argument("--config", type=Path, default=None)
    p_run.add_argument("--seed", type=int, default=None)
    p_run.add_argument("--sets", type=int, default=None)
    p_run.add_argument("--out", type=Path, required=True)
    p_run.add_argument("--no-trajectories", action="store_true")
    p_run.set_defaults(func=_cmd_run)

    p_goals = sub.add_parser("goals", help="list the goal positions")
    p_goals.add_argument("--config", type=Path, default=None)
    p_goals.add_argument("--json", action="store_true")
    p_goals.set_defaults(func=_cmd_goals)

    p_field = sub.add_parser("field-dump", help="dump a focal field scan as CSV")
    p_field.add_argument("--focus", default="0,0,300")
    p_field.add_argument("--span", type=float, default=20.0)
    p_field.add_argument("--step", type=float, default=1.0)
    p_field.add_argument("--layout", type=Path, default=None,
                         help="JSON array layout (default: six-unit tiling)")
    p_field.add_argument("--out", type=Path, required=True)
    p_field.set_defaults(func=_cmd_field_dump)

    p_replay = sub.add_parser("replay", help="recompute metrics from trajectories")
    p_replay.add_argument("trajectories", type=Path)
    p_replay.add_argument("--config", type=Path, default=None)
    p_replay.set_defaults(func=_cmd_replay)

    p_serve = sub.add_parser("serve", help="serve the human trial service")
    p_serve.add_argument("--config", type=Path, default=None)
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8765)
    p_serve.add_argument("--log-dir", default=None)
    p_serve.add_argument("--static", default=None,
                         help="directory with the browser client build")
    p_serve.add_argument("--scripted", action="store_true",
                         help="let the client drive the clock (testing)")
    p_serve.add_argument("--no-intensity", action="store_true",
                         help="skip per-dot acoustic intensity computation")
    p_serve.set_defaults(func=_cmd_serve)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""The guidance protocol: 14 goals, randomized sets, metrics and export.

A set presents fourteen goals in seeded random order; three sets make a
protocol run. Each trial times out after 30 s. Per trial we record the 3D
error to the goal, the lateral error to the presented circle centre, the
duration and whether the trial completed; medians are computed over
completed trials only.

Goal geometry: six axis goals one workspace half-extent away along +-x, +-y,
+-z, plus eight two-axis diagonals (+-x+-z and +-y+-z). Goals 6..9 are the
four horizontal ones. The exact arrangement of the original fourteen
directions is not published; this reconstruction matches the constraints
that are (count, four horizontal goals numbered 6-9, sqrt(2) diagonals).
"""
from __future__ import annotations

import csv
import json
import statistics
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .agent import AgentParams, PolicyResult, run_policy
from .array_geometry import Workspace, default_workspace
from .cone import GuidanceCone
from .stm import DEFAULT_N_POINTS, DEFAULT_RENDER_FREQ_HZ
from .tracking import HandSample, SensorModel

TRIAL_CSV_COLUMNS = ["goal_id", "set", "completed", "eps_xyz", "eps_xy", "duration", "seed"]

HORIZONTAL_GOAL_IDS = (6, 7, 8, 9)
VERTICAL_GOAL_IDS = (1, 2)


@dataclass(frozen=True)
class Goal:
    goal_id: int
    label: str
    position: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "position", np.asarray(self.position, dtype=float))


def generate_goals(workspace: Workspace) -> list[Goal]:
    """The fourteen goal positions around the workspace start point."""
    s = workspace.start_point
    d = workspace.half_extent
    offsets = [
        (1, "down", (0.0, 0.0, -d)),
        (2, "up", (0.0, 0.0, d)),
        (3, "+x down", (d, 0.0, -d)),
        (4, "-x down", (-d, 0.0, -d)),
        (5, "+y down", (0.0, d, -d)),
        (6, "+x", (d, 0.0, 0.0)),
        (7, "-x", (-d, 0.0, 0.0)),
        (8, "+y", (0.0, d, 0.0)),
        (9, "-y", (0.0, -d, 0.0)),
        (10, "-y down", (0.0, -d, -d)),
        (11, "+x up", (d, 0.0, d)),
        (12, "-x up", (-d, 0.0, d)),
        (13, "+y up", (0.0, d, d)),
        (14, "-y up", (0.0, -d, d)),
    ]
    return [Goal(goal_id=i, label=label, position=s + np.array(off))
            for i, label, off in offsets]


def goal_error(final_position: np.ndarray, goal_position: np.ndarray) -> float:
    """3D distance between where the trial ended and the goal, mm."""
    return float(np.linalg.norm(np.asarray(final_position, float)
                                - np.asarray(goal_position, float)))


def center_error(final_position: np.ndarray, cone: GuidanceCone) -> float:
    """Lateral distance from the final hand position to the circle centre
    presented there, mm."""
    final_position = np.asarray(final_position, dtype=float)
    cx, cy = cone.cross_section(final_position).center
    return float(np.hypot(final_position[0] - cx, final_position[1] - cy))


@dataclass
class TrialResult:
    goal_id: int
    set_index: int
    seed: int
    completed: bool
    eps_xyz: float
    eps_xy: float
    duration: float
    final_position: np.ndarray
    samples: list[HandSample] = field(default_factory=list)


def result_from_trajectory(cone: GuidanceCone, goal: Goal, samples: Sequence[HandSample],
                           completed: bool, duration: float, set_index: int = 1,
                           seed: int = 0) -> TrialResult:
    """Score a finished trajectory; the single code path for all metrics."""
    final = np.asarray(samples[-1].position, dtype=float)
    return TrialResult(
        goal_id=goal.goal_id,
        set_index=set_index,
        seed=seed,
        completed=completed,
        eps_xyz=goal_error(final, goal.position),
        eps_xy=center_error(final, cone),
        duration=float(duration),
        final_position=final,
        samples=list(samples),
    )


@dataclass(frozen=True)
class ExperimentConfig:
    workspace: Workspace = field(default_factory=default_workspace)
    base_radius: float = 30.0
    min_radius: float = 5.0
    sensor: SensorModel = field(default_factory=SensorModel)
    agent: AgentParams = field(default_factory=AgentParams)
    palm_radius: float = 40.0
    n_points: int = DEFAULT_N_POINTS
    render_freq: float = DEFAULT_RENDER_FREQ_HZ
    sets: int = 3
    timeout: float = 30.0
    seed: int = 0
    goals: tuple[Goal, ...] | None = None

    def goal_list(self) -> list[Goal]:
        return list(self.goals) if self.goals is not None else generate_goals(self.workspace)

    def cone_for(self, goal: Goal) -> GuidanceCone:
        return GuidanceCone(start=self.workspace.start_point, goal=goal.position,
                            base_radius=self.base_radius, min_radius=self.min_radius)


def load_config(path: str | Path) -> ExperimentConfig:
    """Read an ExperimentConfig from JSON; missing keys keep their defaults.

    Recognised keys: workspace {start, half_extent}, cone {base_radius,
    min_radius}, sensor {frame_rate, latency, noise_std}, agent {any
    AgentParams field}, palm_radius, stm {n_points, render_freq},
    experiment {sets, timeout, seed}, goals [{id, label, position}].
    """
    raw = json.loads(Path(path).read_text())
    cfg = ExperimentConfig()
    ws_raw = raw.get("workspace", {})
    workspace = Workspace(
        start_point=np.asarray(ws_raw.get("start", cfg.workspace.start_point), float),
        half_extent=float(ws_raw.get("half_extent", cfg.workspace.half_extent)),
    )
    cone_raw = raw.get("cone", {})
    sensor_raw = raw.get("sensor", {})
    sensor = SensorModel(
        frame_rate=float(sensor_raw.get("frame_rate", cfg.sensor.frame_rate)),
        latency=float(sensor_raw.get("latency", cfg.sensor.latency)),
        noise_std=float(sensor_raw.get("noise_std", cfg.sensor.noise_std)),
    )
    agent = replace(AgentParams(), **raw.get("agent", {}))
    stm_raw = raw.get("stm", {})
    exp_raw = raw.get("experiment", {})
    goals = None
    if "goals" in raw:
        goals = tuple(Goal(goal_id=int(g["id"]), label=g.get("label", str(g["id"])),
                           position=np.asarray(g["position"], float))
                      for g in raw["goals"])
    return ExperimentConfig(
        workspace=workspace,
        base_radius=float(cone_raw.get("base_radius", cfg.base_radius)),
        min_radius=float(cone_raw.get("min_radius", cfg.min_radius)),
        sensor=sensor,
        agent=agent,
        palm_radius=float(raw.get("palm_radius", cfg.palm_radius)),
        n_points=int(stm_raw.get("n_points", cfg.n_points)),
        render_freq=float(stm_raw.get("render_freq", cfg.render_freq)),
        sets=int(exp_raw.get("sets", cfg.sets)),
        timeout=float(exp_raw.get("timeout", cfg.timeout)),
        seed=int(exp_raw.get("seed", cfg.seed)),
        goals=goals,
    )


def trial_seed(master_seed: int, set_index: int, goal_id: int) -> int:
    """Stable per-trial seed derived from the master seed and trial identity."""
    return int(np.random.SeedSequence([master_seed, set_index, goal_id]).generate_state(1)[0])


def _default_policy(cone: GuidanceCone, config: ExperimentConfig, seed: int) -> PolicyResult:
    return run_policy(cone, params=config.agent, sensor=config.sensor,
                      palm_radius=config.palm_radius, n_points=config.n_points,
                      render_freq=config.render_freq, seed=seed, timeout=config.timeout)


PolicyRunner = Callable[[GuidanceCone, ExperimentConfig, int], PolicyResult]


@dataclass
class SetSummary:
    per_goal_rate: dict[int, float]
    per_goal_results: dict[int, list[TrialResult]]
    median_eps_xyz: float | None
    median_eps_xy: float | None
    median_duration: float | None


def summarize(results: Sequence[TrialResult]) -> SetSummary:
    """Aggregate trials: per-goal completion rates, medians over completed."""
    per_goal: dict[int, list[TrialResult]] = {}
    for r in results:
        per_goal.setdefault(r.goal_id, []).append(r)
    rates = {g: sum(r.completed for r in rs) / len(rs) for g, rs in per_goal.items()}
    completed = [r for r in results if r.completed]
    return SetSummary(
        per_goal_rate=rates,
        per_goal_results=per_goal,
        median_eps_xyz=statistics.median([r.eps_xyz for r in completed]) if completed else None,
        median_eps_xy=statistics.median([r.eps_xy for r in completed]) if completed else None,
        median_duration=statistics.median([r.duration for r in completed]) if completed else None,
    )


def run_set(config: ExperimentConfig, policy: PolicyRunner = _default_policy
            ) -> tuple[list[TrialResult], SetSummary]:
    """Run the full protocol: `config.sets` sets of all goals, seeded order.

    Timeouts are data, not errors: incomplete trials are recorded and only
    excluded from the medians.
    """
    goals = config.goal_list()
    results: list[TrialResult] = []
    for set_index in range(1, config.sets + 1):
        order_rng = np.random.default_rng([config.seed, set_index])
        order = order_rng.permutation(len(goals))
        for idx in order:
            goal = goals[idx]
            seed = trial_seed(config.seed, set_index, goal.goal_id)
            cone = config.cone_for(goal)
            run = policy(cone, config, seed)
            result = result_from_trajectory(cone, goal, run.samples, run.reached,
                                            run.elapsed, set_index=set_index, seed=seed)
            results.append(result)
    return results, summarize(results)


def _fmt(value: float) -> str:
    return repr(float(value))


def export(results: Sequence[TrialResult], summary: SetSummary, out_dir: str | Path,
           write_trajectories: bool = True) -> dict[str, Path]:
    """Write the run to `out_dir`: per-trial CSV, JSON summary, JSON-lines
    trajectories and box-plot-ready per-goal quantiles. Deterministic output
    byte for byte for identical inputs."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths: dict[str, Path] = {}

    trials_path = out / "trials.csv"
    with open(trials_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRIAL_CSV_COLUMNS)
        for r in results:
            writer.writerow([r.goal_id, r.set_index, str(r.completed).lower(),
                             _fmt(r.eps_xyz), _fmt(r.eps_xy), _fmt(r.duration), r.seed])
    paths["trials"] = trials_path

    summary_path = out / "summary.json"
    payload = {
        "per_goal_rate": {str(g): summary.per_goal_rate[g]
                          for g in sorted(summary.per_goal_rate)},
        "median_eps_xyz": summary.median_eps_xyz,
        "median_eps_xy": summary.median_eps_xy,
        "median_duration": summary.median_duration,
        "n_trials": len(results),
        "n_completed": sum(r.completed for r in results),
    }
    summary_path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    paths["summary"] = summary_path

    quantiles_path = out / "quantiles.csv"
    with open(quantiles_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["goal_id", "metric", "n", "min", "q1", "median", "q3", "max"])
        for goal_id in sorted(summary.per_goal_results):
            complete = [r for r in summary.per_goal_results[goal_id] if r.completed]
            for metric in ("eps_xyz", "eps_xy", "duration"):
                values = sorted(getattr(r, metric) for r in complete)
                if not values:
                    writer.writerow([goal_id, metric, 0, "", "", "", "", ""])
                    continue
                q1, q2, q3 = np.quantile(values, [0.25, 0.5, 0.75])
                writer.writerow([goal_id, metric, len(values), _fmt(values[0]),
                                 _fmt(q1), _fmt(q2), _fmt(q3), _fmt(values[-1])])
    paths["quantiles"] = quantiles_path

    if write_trajectories:
        traj_path = out / "trajectories.jsonl"
        with open(traj_path, "w") as fh:
            for r in results:
                for s in r.samples:
                    row = {"goal_id": r.goal_id, "set": r.set_index, "seed": r.seed,
                           "t": s.timestamp, "position": [float(v) for v in s.position]}
                    fh.write(json.dumps(row, sort_keys=True) + "\n")
        paths["trajectories"] = traj_path

    return paths

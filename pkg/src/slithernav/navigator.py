"""Top-level navigation: plan a waypoint path on the grid, then run the
learned local controller waypoint by waypoint, gait generation and gait
tracking underneath. Produces a tick-level trace.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .config import RunConfig
from .ddpg import DdpgAgent
from .envs import reward as nav_reward
from .planner import OccupancyGrid, WaypointPath, a_star, extract_waypoints
from .sim import GaitSimulator, SimulationAborted, goal_frame
from .geometry import rot_z


class UnreachableGoalError(Exception):
    """The planner found no corridor path from start to goal."""


class InfeasibleStartError(Exception):
    """The robot body does not fit in free space at the start pose."""


def validate_start_pose(grid: OccupancyGrid, start, model) -> None:
    """The straight body extends body-length behind the head; every module
    must sit in a free cell or the wall penalties launch the robot."""
    x, y, heading = start
    d = np.array([np.cos(heading), np.sin(heading)])
    for k in range(model.n_bodies + 1):
        p = np.array([x, y]) - (k * model.link_length) * d
        if not grid.is_free(grid.cell_of(p)):
            raise InfeasibleStartError(
                f"body segment {k} at {p.round(2)} lies in a wall for start pose {start}"
            )


def corridor_heading(path: WaypointPath, fallback: float = 0.0) -> float:
    """Spawn heading that lays the body along the first plan segment (the
    body extends behind the head, so the head faces away from the second
    waypoint)."""
    wps = path.waypoints
    if len(wps) < 2:
        return fallback
    d = wps[1] - wps[0]
    return float(np.arctan2(d[1], d[0]) + np.pi)


@dataclass(frozen=True)
class NavigationTask:
    grid: OccupancyGrid
    start: tuple[float, float, float]  # x, y, heading
    goal_cell: tuple[int, int]
    arrival_radius: float = 0.3
    time_budget: float = 600.0

    def __post_init__(self):
        if self.arrival_radius <= 0.0:
            raise ValueError("arrival_radius must be > 0")
        if self.time_budget <= 0.0:
            raise ValueError("time_budget must be > 0")


@dataclass
class NavigationTrace:
    """Uniform control-rate time series plus one row per policy decision."""

    times: list = field(default_factory=list)
    com: list = field(default_factory=list)
    joints: list = field(default_factory=list)
    waypoint_index: list = field(default_factory=list)
    cumulative_reward: list = field(default_factory=list)
    decisions: list = field(default_factory=list)  # dicts: time, action, waypoint index
    pitch_joints: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))
    yaw_joints: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))

    def add_tick(self, rec, wp_index, cum_reward):
        self.times.append(rec.time)
        self.com.append(rec.com)
        self.joints.append(rec.joints)
        self.waypoint_index.append(wp_index)
        self.cumulative_reward.append(cum_reward)

    def __len__(self):
        return len(self.times)

    def to_csv(self, path):
        """Tick series; joint columns carry their axis family in the name."""
        names = [None] * (len(self.pitch_joints) + len(self.yaw_joints))
        for j in self.pitch_joints:
            names[j] = f"pitch_q{j + 1}"
        for j in self.yaw_joints:
            names[j] = f"yaw_q{j + 1}"
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("time,com_x,com_y,com_z,waypoint_index,cumulative_reward,"
                     + ",".join(names) + "\n")
            for i in range(len(self.times)):
                row = [
                    repr(float(self.times[i])),
                    *(repr(float(v)) for v in self.com[i]),
                    str(self.waypoint_index[i]),
                    repr(float(self.cumulative_reward[i])),
                    *(repr(float(v)) for v in self.joints[i]),
                ]
                fh.write(",".join(row) + "\n")

    def to_jsonl(self, path):
        """Line-delimited records: one `decision` row per policy step and one
        `tick` row per control tick."""
        with open(path, "w", encoding="utf-8") as fh:
            for d in self.decisions:
                fh.write(json.dumps({"type": "decision", **d}) + "\n")
            for i in range(len(self.times)):
                fh.write(
                    json.dumps(
                        {
                            "type": "tick",
                            "time": float(self.times[i]),
                            "com": [float(v) for v in self.com[i]],
                            "joints": [float(v) for v in self.joints[i]],
                            "waypoint_index": int(self.waypoint_index[i]),
                            "cumulative_reward": float(self.cumulative_reward[i]),
                        }
                    )
                    + "\n"
                )


def waypoint_frames(path: WaypointPath, fallback_heading: float):
    """Orientation per waypoint: face the next one; the last inherits."""
    wps = path.waypoints
    frames = []
    for i in range(len(wps)):
        if i + 1 < len(wps):
            d = wps[i + 1] - wps[i]
            heading = float(np.arctan2(d[1], d[0])) if np.linalg.norm(d) > 1e-12 else fallback_heading
        elif frames:
            heading = frames[-1][1]
        else:
            heading = fallback_heading
        frames.append((np.array([wps[i][0], wps[i][1], 0.0]), heading))
    return [(pos, rot_z(h), h) for (pos, h) in frames]


def plan_task(task: NavigationTask, config: RunConfig) -> WaypointPath:
    start_cell = task.grid.cell_of(task.start[:2])
    cell_path = a_star(task.grid, start_cell, task.goal_cell)
    if not cell_path:
        raise UnreachableGoalError(f"no path from {start_cell} to {task.goal_cell}")
    spacing = (config["planner.spacing_min"], config["planner.spacing_max"])
    return extract_waypoints(task.grid, cell_path, spacing)


def navigate(task: NavigationTask, agent: DdpgAgent, config: RunConfig):
    """Run the full stack on one task; returns (trace, outcome dict).

    outcome["status"] is "reached", "timeout" or "aborted"; planning errors
    raise before any simulation runs.
    """
    path = plan_task(task, config)
    frames = waypoint_frames(path, task.start[2])
    grid = task.grid
    walls = (
        grid.cells.astype(np.uint8),
        float(grid.origin[0]),
        float(grid.origin[1]),
        float(grid.cell_size),
    )
    sim = GaitSimulator(config, walls=walls)
    validate_start_pose(grid, task.start, sim.model)
    z0 = sim.model.link_height / 2.0
    sim.reset(head_pos=(task.start[0], task.start[1], z0), heading=task.start[2])

    trace = NavigationTrace(pitch_joints=sim.pitch_joints, yaw_joints=sim.yaw_joints)
    ticks_per_decision = config.ticks_per_decision
    weights = config.reward_weights()
    wp = 0
    cum_reward = 0.0
    prev_action = None
    prev_dist = None
    status = "timeout"
    t = 0.0
    while t < task.time_budget - 1e-9:
        gp, gr, _ = frames[wp]
        obs = sim.observe(gp, gr)
        action = agent.act(obs)
        d_before = float(np.linalg.norm(gp - sim.state.head_position(sim.model)))
        sim.set_gait(action)
        ticks_ok = True
        for _ in range(ticks_per_decision):
            try:
                recs = sim.run_ticks(1)
            except SimulationAborted:
                status = "aborted"
                ticks_ok = False
                break
            t = recs[-1].time
            # waypoint advance is checked at the control rate
            if (
                wp < len(frames)
                and np.linalg.norm(frames[wp][0][:2] - sim.head_planar_position())
                < task.arrival_radius
            ):
                wp += 1
                if wp == len(frames):
                    status = "reached"
            trace.add_tick(recs[-1], min(wp, len(frames) - 1), cum_reward)
            if status == "reached" or t >= task.time_budget - 1e-9:
                break
        d_after = float(
            np.linalg.norm(frames[min(wp, len(frames) - 1)][0] - sim.state.head_position(sim.model))
        )
        a_prev = action if prev_action is None else prev_action
        r = nav_reward(d_after, d_before if prev_dist is None else prev_dist, action, a_prev, weights)
        cum_reward += r
        trace.decisions.append(
            {
                "time": float(t),
                "waypoint_index": int(min(wp, len(frames) - 1)),
                "action": [float(v) for v in action],
                "reward": float(r),
                "control_ticks": ticks_per_decision,
                "physics_steps": ticks_per_decision * config.substeps_per_tick,
            }
        )
        prev_action = action
        prev_dist = d_after
        if not ticks_ok or status == "reached":
            break
    outcome = {
        "status": status,
        "time": float(t),
        "waypoints_total": len(frames),
        "waypoints_reached": int(wp),
        "cumulative_reward": float(cum_reward),
        "gimbal_clamps": int(sim.gimbal_count),
    }
    return trace, outcome


def zero_shot_eval(agent: DdpgAgent, n_mazes: int, seed: int, config: RunConfig,
                   size_range=(4, 7), time_budget: float | None = None):
    """Generate n mazes of varying layout and size, navigate each between
    random free cells, and aggregate outcomes."""
    from .planner import kruskal_maze

    rng = np.random.default_rng(seed)
    runs = []
    for i in range(n_mazes):
        cx = int(rng.integers(size_range[0], size_range[1] + 1))
        cy = int(rng.integers(size_range[0], size_range[1] + 1))
        grid = kruskal_maze(cx, cy, seed=int(rng.integers(0, 2**31 - 1)),
                            cell_size=config["planner.cell_size"])
        free = [c for c in grid.free_cells() if c[0] % 2 == 1 and c[1] % 2 == 1]
        start_cell = free[int(rng.integers(0, len(free)))]
        goal_cell = free[int(rng.integers(0, len(free)))]
        start_xy = grid.cell_center(start_cell)
        # lay the body along the first plan segment so it spawns in free space
        probe = NavigationTask(
            grid=grid,
            start=(float(start_xy[0]), float(start_xy[1]), 0.0),
            goal_cell=goal_cell,
            arrival_radius=config["nav.arrival_radius"],
            time_budget=time_budget or config["nav.time_budget"],
        )
        heading = corridor_heading(plan_task(probe, config))
        task = NavigationTask(
            grid=grid,
            start=(float(start_xy[0]), float(start_xy[1]), heading),
            goal_cell=goal_cell,
            arrival_radius=probe.arrival_radius,
            time_budget=probe.time_budget,
        )
        _, outcome = navigate(task, agent, config)
        runs.append(
            {
                "maze": f"{cx}x{cy}",
                "start": list(start_cell),
                "goal": list(goal_cell),
                **outcome,
            }
        )
    successes = sum(1 for r in runs if r["status"] == "reached")
    times = [r["time"] for r in runs if r["status"] == "reached"]
    return {
        "n": n_mazes,
        "successes": successes,
        "success_rate": successes / n_mazes if n_mazes else None,
        "mean_time": float(np.mean(times)) if times else None,
        "runs": runs,
    }

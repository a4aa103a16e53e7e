"""Training-interface benchmark: gait-parameter actions at the decision rate
versus joint-space torque actions at the control rate.

Both modes run the same physics for the same simulated duration and perform
one learner update per action; the joint-space baseline therefore updates
100x more often per simulated second, which is the mechanism that makes the
gait-parameter interface cheap to train.
"""

from __future__ import annotations

import json
import time

import numpy as np

from . import backend
from .config import RunConfig
from .ddpg import DdpgAgent, ReplayBuffer, Transition, exploration_noise
from .envs import LocalNavEnv, reward as nav_reward
from .sim import GaitSimulator, goal_frame


def _sane(obs, r) -> bool:
    """Reject transitions from a diverging rollout (the 50 Hz random-torque
    baseline regularly blows the dynamics up; its pre-failure observations
    would poison the networks)."""
    return bool(np.all(np.isfinite(obs)) and np.abs(obs).max() < 1e4 and abs(r) < 1e4)


def _prefill(buffer, batch, obs_dim, act_dim, rng):
    """Seed the buffer so both modes pay one update per action from the very
    first step (the cadence comparison is the point of the benchmark)."""
    for _ in range(batch):
        buffer.push(
            Transition(
                rng.normal(size=obs_dim), rng.normal(size=act_dim), 0.0,
                rng.normal(size=obs_dim), False,
            )
        )


def bench_gait_interface(config: RunConfig, n_physics_steps: int, seed: int):
    """Decision-rate loop: policy + one update per decision period."""
    env = LocalNavEnv(config, seed=seed)
    agent = DdpgAgent(config.ddpg_config(), seed=seed)
    buffer = ReplayBuffer(min(config["rl.buffer_capacity"], 100_000), seed=seed + 1)
    rng = np.random.default_rng(seed + 2)
    batch = config["rl.batch_size"]
    _prefill(buffer, batch, agent.obs_dim, agent.act_dim, rng)
    steps_per_decision = config.ticks_per_decision * config.substeps_per_tick
    n_decisions = max(1, n_physics_steps // steps_per_decision)
    obs = env.reset()
    updates = 0
    t0 = time.perf_counter()
    for k in range(n_decisions):
        if env.decision_index >= env.horizon:
            obs = env.reset()
        action = exploration_noise(agent.act(obs), agent.sigma_vector(), rng)
        obs2, r, done, _ = env.step(action)
        buffer.push(Transition(obs, action, r, obs2, done))
        obs = obs2
        if len(buffer) >= batch:
            # gamma=0 keeps the measured update cost identical while removing
            # bootstrap divergence (the benchmark measures cadence, not
            # learning quality)
            agent.update(buffer.sample(batch), gamma=0.0)
            updates += 1
    wall = time.perf_counter() - t0
    sim_seconds = n_decisions * config["rl.decision_period"]
    return {
        "mode": "gait-parameter",
        "physics_steps": n_decisions * steps_per_decision,
        "sim_seconds": sim_seconds,
        "actions": n_decisions,
        "updates": updates,
        "actions_per_sim_second": n_decisions / sim_seconds,
        "wall_seconds": wall,
        "steps_per_second": n_decisions * steps_per_decision / wall,
        "wall_per_sim_second": wall / sim_seconds,
    }


def bench_joint_space(config: RunConfig, n_physics_steps: int, seed: int):
    """Control-rate loop: an 11-D torque-scale action every control tick,
    same networks, one update per tick."""
    model = config.robot_model()
    n = model.n_joints
    u_max = config["pid.u_max"]
    ranges = np.tile([[-u_max, u_max]], (n, 1))
    agent = DdpgAgent(config.ddpg_config(), seed=seed, act_dim=n, action_ranges=ranges)
    buffer = ReplayBuffer(min(config["rl.buffer_capacity"], 100_000), seed=seed + 1,
                          act_dim=n)
    rng = np.random.default_rng(seed + 2)
    batch = config["rl.batch_size"]
    _prefill(buffer, batch, agent.obs_dim, n, rng)
    sim = GaitSimulator(config)
    sim.reset()
    gp, gr = goal_frame(sim.state.head_position(sim.model), np.array([2.0, 2.0]))
    ground = sim._ground_tuple
    pack = sim.model.pack()
    substeps = config.substeps_per_tick
    n_ticks = max(1, n_physics_steps // substeps)
    weights = config.reward_weights()
    obs = sim.observe(gp, gr)
    prev_a = np.zeros(n)
    prev_d = float(np.linalg.norm(gp - sim.state.head_position(sim.model)))
    updates = 0
    t0 = time.perf_counter()
    for k in range(n_ticks):
        action = exploration_noise(agent.act(obs), agent.sigma_vector(), rng, ranges)
        q, qd, _, _, ok = backend.kernel.physics_steps(
            pack, ground, None, sim.state.q, sim.state.qdot, action, substeps,
            config.dt, config["physics.gravity"], model.contact_bodies, model.contact_offsets,
        )
        if not ok:
            sim.reset()
            obs = sim.observe(gp, gr)
            prev_d = float(np.linalg.norm(gp - sim.state.head_position(sim.model)))
            continue
        sim.state.q, sim.state.qdot = q, qd
        d = float(np.linalg.norm(gp - sim.state.head_position(sim.model)))
        r = nav_reward(d, prev_d, action, prev_a, weights)
        obs2 = sim.observe(gp, gr)
        if not (_sane(obs, r) and _sane(obs2, r)):
            sim.reset()
            obs = sim.observe(gp, gr)
            prev_d = float(np.linalg.norm(gp - sim.state.head_position(sim.model)))
            continue
        buffer.push(Transition(obs, action, r, obs2, False))
        obs, prev_a, prev_d = obs2, action, d
        if len(buffer) >= batch:
            agent.update(buffer.sample(batch), gamma=0.0)
            updates += 1
    wall = time.perf_counter() - t0
    sim_seconds = n_ticks * config.control_dt
    return {
        "mode": "joint-space",
        "physics_steps": n_ticks * substeps,
        "sim_seconds": sim_seconds,
        "actions": n_ticks,
        "updates": updates,
        "actions_per_sim_second": n_ticks / sim_seconds,
        "wall_seconds": wall,
        "steps_per_second": n_ticks * substeps / wall,
        "wall_per_sim_second": wall / sim_seconds,
    }


def run_bench(config: RunConfig, seed: int | None = None, steps: int | None = None):
    """Compare both interfaces; returns the report dict."""
    seed = config["seed"] if seed is None else seed
    steps = config["bench.steps"] if steps is None else steps
    gait = bench_gait_interface(config, steps, seed)
    joint = bench_joint_space(config, steps, seed)
    ratio = joint["actions_per_sim_second"] / gait["actions_per_sim_second"]
    return {
        "physics_steps_requested": steps,
        "gait_parameter": gait,
        "joint_space": joint,
        "updates_per_sim_second_ratio": ratio,
        "gait_interface_wall_per_sim_second_lower": (
            gait["wall_per_sim_second"] < joint["wall_per_sim_second"]
        ),
        "kernel_backend": backend.backend_name(),
    }


def format_report(report: dict) -> str:
    lines = [f"interface benchmark (kernel: {report['kernel_backend']})"]
    for key in ("gait_parameter", "joint_space"):
        r = report[key]
        lines.append(
            f"  {r['mode']:>15}: {r['physics_steps']} steps, {r['sim_seconds']:.0f} sim s, "
            f"{r['steps_per_second']:,.0f} steps/s, {r['actions_per_sim_second']:.1f} actions/sim s, "
            f"{r['updates']} updates, {r['wall_per_sim_second']:.3f} wall s per sim s"
        )
    lines.append(
        f"  action-rate ratio (joint-space : gait-parameter) = "
        f"{report['updates_per_sim_second_ratio']:.1f}"
    )
    lines.append(
        "  gait-parameter interface wall-clock per simulated second is "
        + ("lower" if report["gait_interface_wall_per_sim_second_lower"] else "NOT lower")
    )
    return "\n".join(lines)


def save_report(report: dict, out_dir):
    import os

    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "bench.json"), "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=1, sort_keys=True)
    text = format_report(report)
    with open(os.path.join(out_dir, "bench.txt"), "w", encoding="utf-8") as fh:
        fh.write(text + "\n")
    return text

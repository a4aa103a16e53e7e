"""Local-navigation training environment: reach a goal pose in an open arena.

One environment step spans one decision period (the gait parameters are held
while the oscillators, PID and physics run underneath). Goals respawn
uniformly in the arena when reached; episodes have a fixed horizon.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import RunConfig
from .ddpg import ACTION_DIM
from .sim import GaitSimulator, SimulationAborted, goal_frame


def reward(d_t: float, d_prev: float, a_t, a_prev, weights=(1.0, 1.0, 0.05)) -> float:
    """Navigation reward: proximity + approach progress - gait-change cost.

    r = w1/(0.1 + d_t) + w2 (d_prev - d_t) - w3 ||a_t - a_prev||_2
    """
    if d_t < 0.0 or d_prev < 0.0:
        raise ValueError("distances must be >= 0")
    w1, w2, w3 = weights
    change = float(np.linalg.norm(np.asarray(a_t, dtype=float) - np.asarray(a_prev, dtype=float)))
    return w1 / (0.1 + d_t) + w2 * (d_prev - d_t) - w3 * change


@dataclass
class DecisionRecord:
    """Per-decision trace entry (timing audit and training diagnostics)."""

    index: int
    control_ticks: int
    physics_steps: int
    action: np.ndarray
    reward: float
    distance: float
    goal: np.ndarray


class LocalNavEnv:
    """Fixed-horizon episodes; the action is the 7-D gait-parameter vector."""

    def __init__(self, config: RunConfig, seed: int = 0):
        self.config = config
        self.sim = GaitSimulator(config)
        self.rng = np.random.default_rng(seed)
        self.arena = config["rl.arena_size"]
        self.goal_radius = config["rl.goal_radius"]
        self.horizon = config.decisions_per_episode
        self.ticks_per_decision = config.ticks_per_decision
        self.weights = config.reward_weights()
        self.goal_pos = np.zeros(3)
        self.goal_rot = np.eye(3)
        self.decision_index = 0
        self.prev_action = None
        self.prev_distance = 0.0
        self.records: list[DecisionRecord] = []
        self.goals_reached = 0

    def _sample_goal(self):
        half = self.arena / 2.0
        xy = self.rng.uniform(-half, half, 2)
        self.goal_pos, self.goal_rot = goal_frame(self.sim.state.head_position(self.sim.model), xy)

    def _distance(self) -> float:
        disp = self.goal_pos - self.sim.state.head_position(self.sim.model)
        return float(np.linalg.norm(disp))

    def reset(self) -> np.ndarray:
        self.sim.reset()
        self._sample_goal()
        self.decision_index = 0
        self.prev_action = None
        self.prev_distance = self._distance()
        self.records = []
        self.goals_reached = 0
        return self.sim.observe(self.goal_pos, self.goal_rot)

    def step(self, action):
        """Run one decision period under `action`; returns
        (obs, reward, done, info). Raises SimulationAborted on physics
        failure (the trainer logs and moves to the next episode)."""
        if self.decision_index >= self.horizon:
            raise RuntimeError("episode is over; call reset()")
        action = np.asarray(action, dtype=float)
        if action.shape != (ACTION_DIM,):
            raise ValueError(f"action must have shape ({ACTION_DIM},)")
        self.sim.set_gait(action)
        ticks = self.sim.run_ticks(self.ticks_per_decision)
        d_t = self._distance()
        a_prev = action if self.prev_action is None else self.prev_action
        r = reward(d_t, self.prev_distance, action, a_prev, self.weights)
        self.decision_index += 1
        self.records.append(
            DecisionRecord(
                index=self.decision_index,
                control_ticks=len(ticks),
                physics_steps=sum(t.substeps for t in ticks),
                action=action.copy(),
                reward=r,
                distance=d_t,
                goal=self.goal_pos.copy(),
            )
        )
        reached = (
            float(np.linalg.norm(self.goal_pos[:2] - self.sim.head_planar_position()))
            < self.goal_radius
        )
        if reached:
            self.goals_reached += 1
            self._sample_goal()
        self.prev_action = action
        self.prev_distance = self._distance()  # against the (possibly new) goal
        done = self.decision_index >= self.horizon
        obs = self.sim.observe(self.goal_pos, self.goal_rot)
        info = {"distance": d_t, "reached": reached, "goals_reached": self.goals_reached}
        return obs, r, done, info

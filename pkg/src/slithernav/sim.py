"""Gait-level simulation wrapper: one robot under PID gait tracking, with the
two oscillator networks (pitch- and yaw-family joints) generating targets at
the control rate and the physics integrating at the fine rate between ticks.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import backend, cpg, robot
from .config import RunConfig
from .geometry import axis_angle_from_matrix, rot_z


class SimulationAborted(RuntimeError):
    """Physics produced non-finite state; episode cannot continue."""


def gait_params_from_action(action) -> tuple[cpg.CpgParams, cpg.CpgParams]:
    """Split the 7-D action [R1, R2, omega, theta1, theta2, delta1, delta2]
    into (pitch, yaw) oscillator inputs; omega is shared."""
    a = np.asarray(action, dtype=float)
    pitch = cpg.CpgParams(amplitude=a[0], omega=a[2], theta=a[3], delta=a[5])
    yaw = cpg.CpgParams(amplitude=a[1], omega=a[2], theta=a[4], delta=a[6])
    return pitch, yaw


@dataclass
class TickRecord:
    """Per-control-tick sample of the robot."""

    time: float
    joints: np.ndarray
    com: np.ndarray
    head: np.ndarray
    substeps: int


class GaitSimulator:
    """Owns robot state, PID state and the two oscillators; advances in
    control ticks. Single-owner mutable state, one instance per episode
    stream."""

    def __init__(self, config: RunConfig, walls=None):
        self.config = config
        self.model = config.robot_model()
        self.ground = config.ground_params()
        self._ground_tuple = (
            self.ground.k1, self.ground.k2, self.ground.mu_c, self.ground.mu_s,
            self.ground.mu_v, self.ground.v_s, self.ground.v_eps,
        )
        self.walls = walls
        self.gains = config.pid_gains()
        self.dt = config.dt
        self.gravity = config["physics.gravity"]
        self.control_dt = config.control_dt
        self.substeps = config.substeps_per_tick
        self.pitch_joints = self.model.pitch_joints()
        self.yaw_joints = self.model.yaw_joints()
        self.cpg_pitch_cfg = config.cpg_config(k=len(self.pitch_joints))
        self.cpg_yaw_cfg = config.cpg_config(k=len(self.yaw_joints))
        self._pack = self.model.pack()
        self.reset()

    def reset(self, head_pos=None, heading: float = 0.0):
        z0 = self.model.link_height / 2.0
        if head_pos is None:
            head_pos = (0.0, 0.0, z0)
        self.state = robot.ConfigState.rest(self.model, head_pos=head_pos, heading=heading)
        n = self.model.n_joints
        self.pid_integ = np.zeros(n)
        self.pid_prev = np.zeros(n)
        self.cpg_pitch = cpg.reset(self.cpg_pitch_cfg)
        self.cpg_yaw = cpg.reset(self.cpg_yaw_cfg)
        self.params_pitch = cpg.CpgParams()
        self.params_yaw = cpg.CpgParams()
        self.head_v_prev = np.zeros(3)
        self.gimbal_count = 0
        self.tick_count = 0

    def set_gait(self, action):
        self.params_pitch, self.params_yaw = gait_params_from_action(action)

    def _targets(self, n_ticks: int) -> np.ndarray:
        """Generate (n_ticks, n_joints) targets by advancing both oscillators
        at the control rate (inputs held constant across the window)."""
        out = np.zeros((n_ticks, self.model.n_joints))
        pitch_x, self.cpg_pitch = cpg.run(
            self.cpg_pitch, self.params_pitch, self.cpg_pitch_cfg, n_ticks, self.control_dt
        )
        yaw_x, self.cpg_yaw = cpg.run(
            self.cpg_yaw, self.params_yaw, self.cpg_yaw_cfg, n_ticks, self.control_dt
        )
        out[:, self.pitch_joints] = pitch_x
        out[:, self.yaw_joints] = yaw_x
        return out

    def run_ticks(self, n_ticks: int) -> list[TickRecord]:
        """Advance n_ticks control ticks; returns one record per tick.
        Raises SimulationAborted on non-finite state (records up to the
        failing tick are lost; callers treat the episode as aborted)."""
        targets = self._targets(n_ticks)
        (q, qd, integ, prev, rec_j, rec_c, rec_h, hvp, gimbal, done, ok) = (
            backend.kernel.control_ticks(
                self._pack,
                self._ground_tuple,
                self.walls,
                self.state.q,
                self.state.qdot,
                targets,
                self.gains.as_tuple(),
                self.pid_integ,
                self.pid_prev,
                self.substeps,
                self.dt,
                self.gravity,
                self.model.contact_bodies,
                self.model.contact_offsets,
            )
        )
        t0 = self.state.time
        self.state = robot.ConfigState(q=q, qdot=qd, time=t0 + done * self.control_dt)
        self.pid_integ, self.pid_prev = integ, prev
        self.head_v_prev = hvp
        self.gimbal_count += gimbal
        self.tick_count += done
        if not ok:
            raise SimulationAborted(f"non-finite state at t={self.state.time:.3f}s")
        return [
            TickRecord(
                time=t0 + (k + 1) * self.control_dt,
                joints=rec_j[k].copy(),
                com=rec_c[k].copy(),
                head=rec_h[k].copy(),
                substeps=self.substeps,
            )
            for k in range(n_ticks)
        ]

    # --- ego-centric sensing ---

    def imu_specific_force(self) -> np.ndarray:
        """Head-frame accelerometer reading: finite-difference head
        acceleration minus gravity, rotated into the head frame."""
        accel = (self.state.head_velocity(self.model) - self.head_v_prev) / self.dt
        g_vec = np.array([0.0, 0.0, -self.gravity])
        return self.state.head_rotation(self.model).T @ (accel - g_vec)

    def observe(self, goal_pos: np.ndarray, goal_rot: np.ndarray) -> np.ndarray:
        """21-D observation: joint angles, IMU specific force, goal
        displacement in the head frame, goal orientation as axis-angle."""
        r_head = self.state.head_rotation(self.model)
        disp = r_head.T @ (np.asarray(goal_pos, dtype=float) - self.state.head_position(self.model))
        rel = r_head.T @ goal_rot
        axis, angle = axis_angle_from_matrix(rel)
        return np.concatenate(
            [
                self.state.joint_angles(self.model),
                self.imu_specific_force(),
                disp,
                axis,
                [angle],
            ]
        )

    def head_planar_position(self) -> np.ndarray:
        return self.state.head_position(self.model)[:2].copy()


def goal_frame(from_pos, goal_xy) -> tuple[np.ndarray, np.ndarray]:
    """Goal pose on the ground plane, x-axis facing from `from_pos` toward the
    goal (the final waypoint of a plan inherits the previous heading)."""
    gp = np.array([goal_xy[0], goal_xy[1], 0.0])
    d = gp[:2] - np.asarray(from_pos, dtype=float)[:2]
    heading = float(np.arctan2(d[1], d[0])) if np.linalg.norm(d) > 1e-12 else 0.0
    return gp, rot_z(heading)

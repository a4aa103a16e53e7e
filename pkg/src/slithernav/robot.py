"""Articulated robot model: forward kinematics, Jacobians, equations of
motion and time stepping.

The robot is a floating head module plus a chain of identical 1-DoF joint
modules whose axes alternate between the yaw (body z) and pitch (body y)
families. Generalized coordinates: [joint angles, head position, head Euler
angles (qx, qy, qz)].
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import backend
from .contact import GroundParams
from .geometry import euler_rotation

GRAVITY = 9.81


class SimulationNanError(RuntimeError):
    """Raised when integration produces non-finite state."""


@dataclass(frozen=True)
class RobotModel:
    """Geometry and inertial description of the articulated robot."""

    n_joints: int = 11
    link_length: float = 0.12
    link_mass: float = 0.5
    link_height: float = 0.08
    link_width: float = 0.08
    yaw_first: bool = True

    joint_axes: np.ndarray = field(init=False, repr=False)
    contact_bodies: np.ndarray = field(init=False, repr=False)
    contact_offsets: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.n_joints < 0:
            raise ValueError("n_joints must be >= 0")
        n = self.n_joints
        axes = np.zeros((n, 3))
        for j in range(n):
            yaw = (j % 2 == 0) == self.yaw_first
            axes[j] = (0.0, 0.0, 1.0) if yaw else (0.0, 1.0, 0.0)
        object.__setattr__(self, "joint_axes", axes)
        # two contact points per module on the bottom face, bracketing the
        # link, plus one at the head tip
        l, hz = self.link_length, self.link_height / 2.0
        cbody = [0, 0, 0]
        coff = [(l / 2.0, 0.0, 0.0), (l / 2.0, 0.0, -hz), (-l / 2.0, 0.0, -hz)]
        for b in range(1, n + 1):
            cbody += [b, b]
            coff += [(0.0, 0.0, -hz), (-l, 0.0, -hz)]
        object.__setattr__(self, "contact_bodies", np.array(cbody, dtype=np.int32))
        object.__setattr__(self, "contact_offsets", np.array(coff, dtype=float))

    @property
    def n_bodies(self) -> int:
        return self.n_joints + 1

    @property
    def ndof(self) -> int:
        return self.n_joints + 6

    @property
    def total_mass(self) -> float:
        return self.link_mass * self.n_bodies

    def body_inertia(self) -> np.ndarray:
        """Box inertia tensor of one module about its CoM, body frame."""
        m = self.link_mass
        a, b, c = self.link_length, self.link_width, self.link_height
        return np.diag(
            [
                m * (b * b + c * c) / 12.0,
                m * (a * a + c * c) / 12.0,
                m * (a * a + b * b) / 12.0,
            ]
        )

    def pack(self):
        """Plain-array description consumed by the kernels."""
        n = self.n_joints
        nb = self.n_bodies
        l = self.link_length
        jpos = np.zeros((n, 3))
        com = np.zeros((nb, 3))
        if n:
            jpos[0] = (-l / 2.0, 0.0, 0.0)
            jpos[1:] = (-l, 0.0, 0.0)
            com[1:] = (-l / 2.0, 0.0, 0.0)
        mass = np.full(nb, self.link_mass)
        inertia = np.broadcast_to(self.body_inertia(), (nb, 3, 3)).copy()
        return (n, self.joint_axes.copy(), jpos, com, mass, inertia)

    def pitch_joints(self) -> np.ndarray:
        """Indices of pitch-family joints (0-based)."""
        return np.array([j for j in range(self.n_joints) if self.joint_axes[j][1] == 1.0])

    def yaw_joints(self) -> np.ndarray:
        return np.array([j for j in range(self.n_joints) if self.joint_axes[j][2] == 1.0])


@dataclass
class ConfigState:
    """Generalized position/velocity of the robot plus simulation time."""

    q: np.ndarray
    qdot: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        self.q = np.asarray(self.q, dtype=float)
        self.qdot = np.asarray(self.qdot, dtype=float)
        if self.q.shape != self.qdot.shape:
            raise ValueError("q and qdot must have the same length")

    @classmethod
    def rest(cls, model: RobotModel, head_pos=(0.0, 0.0, 0.0), heading: float = 0.0):
        """Straight chain with the given head position and world yaw."""
        q = np.zeros(model.ndof)
        q[model.n_joints : model.n_joints + 3] = head_pos
        q[model.ndof - 1] = heading
        return cls(q=q, qdot=np.zeros(model.ndof))

    def head_position(self, model: RobotModel) -> np.ndarray:
        return self.q[model.n_joints : model.n_joints + 3]

    def head_rotation(self, model: RobotModel) -> np.ndarray:
        return euler_rotation(self.q[model.n_joints + 3 :])

    def head_velocity(self, model: RobotModel) -> np.ndarray:
        return self.qdot[model.n_joints : model.n_joints + 3]

    def joint_angles(self, model: RobotModel) -> np.ndarray:
        return self.q[: model.n_joints]


@dataclass(frozen=True)
class FrameSet:
    """World pose of every module: rotation, frame origin, CoM position."""

    rotations: np.ndarray  # (nb, 3, 3)
    origins: np.ndarray  # (nb, 3)
    com_positions: np.ndarray  # (nb, 3)


@dataclass(frozen=True)
class DynamicsMatrices:
    """Equation-of-motion terms: D qdd + H = B_a u + J_c^T F."""

    d: np.ndarray  # (ndof, ndof) mass matrix
    h: np.ndarray  # (ndof,) Coriolis/centrifugal + gravity bias
    b_a: np.ndarray  # (ndof, n) actuation map
    j_c: np.ndarray  # (3*nc, ndof) stacked contact Jacobians


def _check_state(model: RobotModel, state: ConfigState):
    if state.q.shape[0] != model.ndof:
        raise ValueError(f"state dimension {state.q.shape[0]} != model ndof {model.ndof}")


def forward_kinematics(model: RobotModel, state: ConfigState) -> FrameSet:
    _check_state(model, state)
    r, d, pcm = backend.kernel.kinematics(model.pack(), state.q)
    return FrameSet(rotations=r, origins=d, com_positions=pcm)


def body_jacobians(model: RobotModel, state: ConfigState):
    """Per-module (J_v, beta) with v_cm = J_v qdot and omega = beta qdot."""
    _check_state(model, state)
    return backend.kernel.body_jacobians(model.pack(), state.q)


def compute_dynamics(
    model: RobotModel, state: ConfigState, gravity: float = GRAVITY
) -> DynamicsMatrices:
    _check_state(model, state)
    pack = model.pack()
    dmat, h = backend.kernel.dynamics(pack, state.q, state.qdot, gravity)
    b_a = np.zeros((model.ndof, model.n_joints))
    b_a[: model.n_joints, :] = np.eye(model.n_joints)
    j_c = backend.kernel.contact_jacobian(pack, state.q, model.contact_bodies, model.contact_offsets)
    return DynamicsMatrices(d=dmat, h=h, b_a=b_a, j_c=j_c)


def contact_point_state(model: RobotModel, state: ConfigState):
    """(positions, velocities) of the robot's contact points, world frame."""
    _check_state(model, state)
    return backend.kernel.contact_state(
        model.pack(), state.q, state.qdot, model.contact_bodies, model.contact_offsets
    )


def _ground_tuple(ground: GroundParams | None):
    if ground is None:
        return None
    return (ground.k1, ground.k2, ground.mu_c, ground.mu_s, ground.mu_v, ground.v_s, ground.v_eps)


def step(
    model: RobotModel,
    state: ConfigState,
    u: np.ndarray | None,
    ground: GroundParams | None,
    dt: float,
    n_steps: int = 1,
    gravity: float = GRAVITY,
    walls=None,
) -> ConfigState:
    """Advance the state by n_steps semi-implicit Euler steps under constant
    joint torque u and ground/wall contact. Raises SimulationNanError if the
    state leaves the finite range."""
    _check_state(model, state)
    if dt <= 0.0:
        raise ValueError("dt must be > 0")
    if u is not None:
        u = np.asarray(u, dtype=float)
        if u.shape[0] != model.n_joints:
            raise ValueError("torque vector length mismatch")
        if not np.all(np.isfinite(u)):
            raise ValueError("torque must be finite")
    q, qd, _, done, ok = backend.kernel.physics_steps(
        model.pack(),
        _ground_tuple(ground),
        walls,
        state.q,
        state.qdot,
        u,
        n_steps,
        dt,
        gravity,
        model.contact_bodies,
        model.contact_offsets,
    )
    if not ok:
        raise SimulationNanError(f"non-finite state after {done} steps at t={state.time + done * dt:.4f}")
    return ConfigState(q=q, qdot=qd, time=state.time + n_steps * dt)


def kinetic_energy(model: RobotModel, state: ConfigState) -> float:
    dyn = compute_dynamics(model, state, gravity=0.0)
    return 0.5 * float(state.qdot @ dyn.d @ state.qdot)


def potential_energy(model: RobotModel, state: ConfigState, gravity: float = GRAVITY) -> float:
    frames = forward_kinematics(model, state)
    return float(gravity * model.link_mass * np.sum(frames.com_positions[:, 2]))


def com_position(model: RobotModel, state: ConfigState) -> np.ndarray:
    frames = forward_kinematics(model, state)
    return frames.com_positions.mean(axis=0)  # equal module masses

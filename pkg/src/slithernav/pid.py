"""Per-joint PID tracking of gait targets, with saturation and anti-windup."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class PidGains:
    kp: float = 25.0
    ki: float = 0.5
    kd: float = 1.2
    u_max: float = 8.0
    i_max: float = 1.0

    def __post_init__(self):
        if min(self.kp, self.ki, self.kd) < 0.0:
            raise ValueError("gains must be >= 0")
        if self.u_max <= 0.0:
            raise ValueError("u_max must be > 0")

    def as_tuple(self):
        return (self.kp, self.ki, self.kd, self.u_max, self.i_max)


@dataclass
class PidState:
    integral: np.ndarray
    prev_error: np.ndarray

    @classmethod
    def zeros(cls, n: int) -> "PidState":
        return cls(integral=np.zeros(n), prev_error=np.zeros(n))


def pid_step(gains: PidGains, state: PidState, target, actual, dt: float):
    """One controller update; returns (new state, torque vector).

    u = clamp(kp e + ki int(e) + kd de/dt, +-u_max) per joint, with the
    integral clamped to +-i_max.
    """
    if dt <= 0.0:
        raise ValueError("dt must be > 0")
    target = np.asarray(target, dtype=float)
    actual = np.asarray(actual, dtype=float)
    if target.shape != actual.shape or target.shape != state.integral.shape:
        raise ValueError("target/actual/state lengths differ")
    err = target - actual
    integral = np.clip(state.integral + err * dt, -gains.i_max, gains.i_max)
    derr = (err - state.prev_error) / dt
    u = np.clip(gains.kp * err + gains.ki * integral + gains.kd * derr, -gains.u_max, gains.u_max)
    return PidState(integral=integral, prev_error=err), u

"""Coupled-oscillator gait generator.

A chain of k phase oscillators with nearest-neighbour coupling produces k
sinusoidal channels. Four scalar inputs shape the output: amplitude R,
frequency omega, inter-channel phase shift theta and offset delta. Phase
dynamics: phi' = omega + A phi + B theta; amplitude dynamics are a
critically damped second-order filter r'' = a((a/4)(R - r) - r') so r tracks
R without overshoot; output x = r sin(phi) + delta.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from . import backend

log = logging.getLogger(__name__)

R_RANGE = (0.0, 1.5)
OMEGA_RANGE = (-0.1, 0.1)
THETA_RANGE = (-np.pi, np.pi)
DELTA_RANGE = (-0.1, 0.1)


@dataclass(frozen=True)
class CpgParams:
    """Commanded oscillator inputs, each a single value broadcast across
    channels (theta fills the k-1 coupling slots)."""

    amplitude: float = 0.0
    omega: float = 0.0
    theta: float = 0.0
    delta: float = 0.0

    def __post_init__(self):
        for name, value, (lo, hi) in (
            ("amplitude", self.amplitude, R_RANGE),
            ("omega", self.omega, OMEGA_RANGE),
            ("theta", self.theta, THETA_RANGE),
            ("delta", self.delta, DELTA_RANGE),
        ):
            if not (lo <= value <= hi):
                raise ValueError(f"{name}={value} outside [{lo}, {hi}]")


@dataclass(frozen=True)
class CpgConfig:
    """Channel count and convergence hyperparameters."""

    k: int
    a: float = 10.0
    mu: float = 5.0
    omega_scale: float = 1.0

    def __post_init__(self):
        if self.k < 2:
            raise ValueError("need at least 2 channels")
        if self.a <= 0.0:
            raise ValueError("convergence gain a must be > 0")
        if np.any(np.asarray(self.mu) <= 0.0):
            raise ValueError("coupling gains mu must be > 0")
        if self.omega_scale != 1.0:
            log.info("cpg omega scale factor %.3g in use", self.omega_scale)

    def mu_vector(self) -> np.ndarray:
        return np.broadcast_to(np.asarray(self.mu, dtype=float), (self.k,)).copy()


@dataclass
class CpgState:
    """Oscillator internal state."""

    phi: np.ndarray
    r: np.ndarray
    rdot: np.ndarray

    @property
    def k(self) -> int:
        return self.phi.shape[0]

    def output(self, delta: float = 0.0) -> np.ndarray:
        return self.r * np.sin(self.phi) + delta


def coupling_matrices(config: CpgConfig):
    """Chain coupling matrix A (k x k) and end-injection matrix B (k x k-1)."""
    k = config.k
    mu = config.mu_vector()
    a = np.zeros((k, k))
    a[0, 0], a[0, 1] = -mu[0], mu[0]
    for i in range(1, k - 1):
        a[i, i - 1 : i + 2] = (mu[i], -2.0 * mu[i], mu[i])
    a[k - 1, k - 2], a[k - 1, k - 1] = mu[k - 1], -mu[k - 1]
    b = np.eye(k, k - 1) - np.eye(k, k - 1, k=-1)
    return a, b


def reset(config: CpgConfig, theta0: float = 0.0) -> CpgState:
    """Fresh state: zero amplitude, phases on the ladder phi_i = -i*theta0."""
    k = config.k
    return CpgState(
        phi=-theta0 * np.arange(k, dtype=float),
        r=np.zeros(k),
        rdot=np.zeros(k),
    )


def cpg_step(state: CpgState, params: CpgParams, config: CpgConfig, dt: float):
    """One explicit-Euler update; returns (new state, output vector)."""
    if dt <= 0.0:
        raise ValueError("dt must be > 0")
    a_mat, b_mat = coupling_matrices(config)
    theta_vec = np.full(config.k - 1, params.theta)
    dphi = params.omega * config.omega_scale + a_mat @ state.phi + b_mat @ theta_vec
    rdd = config.a * ((config.a / 4.0) * (params.amplitude - state.r) - state.rdot)
    phi = state.phi + dt * dphi
    rdot = state.rdot + dt * rdd
    r = state.r + dt * rdot
    new = CpgState(phi=phi, r=r, rdot=rdot)
    return new, new.output(params.delta)


def run(state: CpgState, params: CpgParams, config: CpgConfig, n_steps: int, dt: float,
        with_amplitudes: bool = False):
    """Integrate n_steps with constant params via the active kernel; returns
    ((n_steps, k) outputs, final state), plus the per-step amplitude
    trajectory when requested. Identical math to cpg_step."""
    out, r_traj, phi, r, rdot = backend.kernel.cpg_rollout(
        state.phi,
        state.r,
        state.rdot,
        params.amplitude,
        params.omega * config.omega_scale,
        params.theta,
        params.delta,
        config.a,
        config.mu_vector(),
        n_steps,
        dt,
    )
    new = CpgState(phi=phi, r=r, rdot=rdot)
    if with_amplitudes:
        return out, r_traj, new
    return out, new


@dataclass
class CpgOscillator:
    """Stateful convenience wrapper owning one oscillator network."""

    config: CpgConfig
    dt: float
    params: CpgParams = field(default_factory=CpgParams)
    state: CpgState = None  # type: ignore[assignment]

    def __post_init__(self):
        if self.state is None:
            self.state = reset(self.config, self.params.theta)

    def set_params(self, params: CpgParams):
        self.params = params

    def tick(self) -> np.ndarray:
        self.state, x = cpg_step(self.state, self.params, self.config, self.dt)
        return x

"""Run configuration: one flat, human-readable key-value file drives every
tunable in the stack. Unknown keys are rejected; values are validated
against the invariants of the types that consume them.

File format: one `key = value` per line, `#` starts a comment. See
docs/formats.md for the full schema.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .contact import GroundParams
from .cpg import CpgConfig
from .ddpg import DdpgConfig
from .pid import PidGains
from .robot import RobotModel


class ConfigError(Exception):
    pass


def _bool(text: str) -> bool:
    if text.lower() in ("true", "1", "yes", "on"):
        return True
    if text.lower() in ("false", "0", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


# key -> (parser, default)
SCHEMA = {
    "seed": (int, 0),
    "physics.dt": (float, 1e-3),
    "physics.gravity": (float, 9.81),
    "robot.n_joints": (int, 11),
    "robot.link_length": (float, 0.12),
    "robot.link_mass": (float, 0.5),
    "robot.link_width": (float, 0.08),
    "robot.link_height": (float, 0.08),
    "robot.yaw_first": (_bool, True),
    "ground.k1": (float, 2.0e4),
    "ground.k2": (float, 150.0),
    "ground.mu_c": (float, 0.4),
    "ground.mu_s": (float, 0.6),
    "ground.mu_v": (float, 0.1),
    "ground.v_s": (float, 0.05),
    "ground.v_eps": (float, 1e-3),
    "cpg.a": (float, 10.0),
    "cpg.mu": (float, 5.0),
    "cpg.omega_scale": (float, 1.0),
    "pid.kp": (float, 25.0),
    "pid.ki": (float, 0.5),
    "pid.kd": (float, 1.2),
    "pid.u_max": (float, 8.0),
    "pid.i_max": (float, 1.0),
    "control.rate_hz": (float, 50.0),
    "rl.decision_period": (float, 2.0),
    "rl.episode_seconds": (float, 160.0),
    "rl.episodes": (int, 40000),
    "rl.arena_size": (float, 8.0),
    "rl.goal_radius": (float, 0.3),
    "rl.hidden": (int, 256),
    "rl.actor_lr": (float, 1e-4),
    "rl.critic_lr": (float, 1e-3),
    "rl.gamma": (float, 0.99),
    "rl.tau": (float, 0.005),
    "rl.batch_size": (int, 128),
    "rl.buffer_capacity": (int, 1_000_000),
    "rl.sigma_scale": (float, 0.1),
    "rl.sigma_decay_episodes": (int, 0),  # 0: decay over rl.episodes
    "rl.updates_per_decision": (int, 1),
    "rl.workers": (int, 1),
    "reward.w1": (float, 1.0),
    "reward.w2": (float, 1.0),
    "reward.w3": (float, 0.05),
    "planner.cell_size": (float, 2.0),
    "planner.spacing_min": (float, 1.5),
    "planner.spacing_max": (float, 2.5),
    "nav.arrival_radius": (float, 0.3),
    "nav.time_budget": (float, 600.0),
    "bench.steps": (int, 100_000),
}


@dataclass
class RunConfig:
    values: dict

    def __getitem__(self, key):
        return self.values[key]

    @classmethod
    def defaults(cls, **overrides) -> "RunConfig":
        values = {k: default for k, (_, default) in SCHEMA.items()}
        for key, val in overrides.items():
            if key not in SCHEMA:
                raise ConfigError(f"unknown configuration key: {key}")
            values[key] = SCHEMA[key][0](str(val))
        cfg = cls(values)
        cfg.validate()
        return cfg

    @classmethod
    def parse(cls, text: str) -> "RunConfig":
        values = {k: default for k, (_, default) in SCHEMA.items()}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
            key, _, val = line.partition("=")
            key = key.strip()
            val = val.strip()
            if key not in SCHEMA:
                raise ConfigError(f"line {lineno}: unknown configuration key: {key}")
            parser = SCHEMA[key][0]
            try:
                values[key] = parser(val)
            except ValueError as exc:
                raise ConfigError(f"line {lineno}: bad value for {key}: {val!r}") from exc
        cfg = cls(values)
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path) -> "RunConfig":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.parse(fh.read())

    def dump(self) -> str:
        return "\n".join(f"{k} = {self.values[k]}" for k in SCHEMA) + "\n"

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.dump())

    # --- derived objects (each constructor enforces its own invariants) ---

    def robot_model(self) -> RobotModel:
        return RobotModel(
            n_joints=self["robot.n_joints"],
            link_length=self["robot.link_length"],
            link_mass=self["robot.link_mass"],
            link_width=self["robot.link_width"],
            link_height=self["robot.link_height"],
            yaw_first=self["robot.yaw_first"],
        )

    def ground_params(self) -> GroundParams:
        return GroundParams(
            k1=self["ground.k1"],
            k2=self["ground.k2"],
            mu_c=self["ground.mu_c"],
            mu_s=self["ground.mu_s"],
            mu_v=self["ground.mu_v"],
            v_s=self["ground.v_s"],
            v_eps=self["ground.v_eps"],
        )

    def pid_gains(self) -> PidGains:
        return PidGains(
            kp=self["pid.kp"],
            ki=self["pid.ki"],
            kd=self["pid.kd"],
            u_max=self["pid.u_max"],
            i_max=self["pid.i_max"],
        )

    def cpg_config(self, k: int) -> CpgConfig:
        return CpgConfig(
            k=k, a=self["cpg.a"], mu=self["cpg.mu"], omega_scale=self["cpg.omega_scale"]
        )

    def ddpg_config(self) -> DdpgConfig:
        return DdpgConfig(
            hidden=self["rl.hidden"],
            actor_lr=self["rl.actor_lr"],
            critic_lr=self["rl.critic_lr"],
            gamma=self["rl.gamma"],
            tau=self["rl.tau"],
            batch_size=self["rl.batch_size"],
            buffer_capacity=self["rl.buffer_capacity"],
            sigma_scale=self["rl.sigma_scale"],
            updates_per_decision=self["rl.updates_per_decision"],
        )

    def reward_weights(self):
        return (self["reward.w1"], self["reward.w2"], self["reward.w3"])

    @property
    def dt(self) -> float:
        return self["physics.dt"]

    @property
    def control_dt(self) -> float:
        return 1.0 / self["control.rate_hz"]

    @property
    def substeps_per_tick(self) -> int:
        return int(round(1.0 / (self["control.rate_hz"] * self["physics.dt"])))

    @property
    def ticks_per_decision(self) -> int:
        return int(round(self["rl.decision_period"] * self["control.rate_hz"]))

    @property
    def decisions_per_episode(self) -> int:
        return int(round(self["rl.episode_seconds"] / self["rl.decision_period"]))

    def validate(self):
        v = self.values
        if v["physics.dt"] <= 0:
            raise ConfigError("physics.dt must be > 0")
        if v["control.rate_hz"] <= 0:
            raise ConfigError("control.rate_hz must be > 0")
        if v["robot.n_joints"] < 2:
            raise ConfigError("robot.n_joints must be >= 2")
        # the layer rates must nest exactly
        sub = 1.0 / (v["control.rate_hz"] * v["physics.dt"])
        if abs(sub - round(sub)) > 1e-9 or round(sub) < 1:
            raise ConfigError("1/(control.rate_hz * physics.dt) must be a positive integer")
        tpd = v["rl.decision_period"] * v["control.rate_hz"]
        if abs(tpd - round(tpd)) > 1e-9 or round(tpd) < 1:
            raise ConfigError("decision_period * control.rate_hz must be a positive integer")
        dpe = v["rl.episode_seconds"] / v["rl.decision_period"]
        if abs(dpe - round(dpe)) > 1e-9 or round(dpe) < 1:
            raise ConfigError("episode_seconds must be a multiple of decision_period")
        if not (0.0 <= v["rl.gamma"] <= 1.0):
            raise ConfigError("rl.gamma must be in [0, 1]")
        if not (0.0 < v["rl.tau"] <= 1.0):
            raise ConfigError("rl.tau must be in (0, 1]")
        if v["rl.batch_size"] < 1 or v["rl.buffer_capacity"] < v["rl.batch_size"]:
            raise ConfigError("need buffer_capacity >= batch_size >= 1")
        if v["rl.arena_size"] <= 0 or v["rl.goal_radius"] <= 0:
            raise ConfigError("arena and goal radius must be positive")
        if v["rl.workers"] < 1:
            raise ConfigError("rl.workers must be >= 1")
        if not (0 < v["planner.spacing_min"] <= v["planner.spacing_max"]):
            raise ConfigError("need 0 < spacing_min <= spacing_max")
        if v["planner.cell_size"] <= 0:
            raise ConfigError("planner.cell_size must be > 0")
        if v["nav.arrival_radius"] <= 0 or v["nav.time_budget"] <= 0:
            raise ConfigError("nav.arrival_radius and nav.time_budget must be positive")
        if v["reward.w3"] < 0:
            raise ConfigError("reward.w3 must be >= 0 (it enters with a minus sign)")
        if v["bench.steps"] < 1:
            raise ConfigError("bench.steps must be >= 1")
        # these constructors raise ValueError on invariant violations
        try:
            self.robot_model()
            self.ground_params()
            self.pid_gains()
            self.cpg_config(k=2)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if np.isfinite(v["rl.sigma_scale"]) and v["rl.sigma_scale"] < 0:
            raise ConfigError("rl.sigma_scale must be >= 0")

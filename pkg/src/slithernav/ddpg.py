"""Deterministic-policy actor-critic learner for the local-navigation layer.

The actor maps the 21-D ego-centric observation to the 7-D gait-parameter
action [R1, R2, omega, theta1, theta2, delta1, delta2]; the critic scores
(observation, action) pairs. Off-policy updates draw uniform minibatches
from a ring replay buffer; target networks track the online ones with soft
updates.
"""

from __future__ import annotations

import io
import json
import zipfile
from dataclasses import dataclass, field

import numpy as np

from .nn import Mlp, RmsProp

OBS_DIM = 21
ACTION_DIM = 7

# [R1, R2, omega, theta1, theta2, delta1, delta2]
ACTION_RANGES = np.array(
    [
        (0.0, 1.5),
        (0.0, 1.5),
        (-0.1, 0.1),
        (-np.pi, np.pi),
        (-np.pi, np.pi),
        (-0.1, 0.1),
        (-0.1, 0.1),
    ]
)

CHECKPOINT_FORMAT = "slithernav-checkpoint"
CHECKPOINT_VERSION = 1


def clip_action(action: np.ndarray, ranges: np.ndarray = ACTION_RANGES) -> np.ndarray:
    return np.clip(action, ranges[:, 0], ranges[:, 1])


def squash_to_ranges(raw: np.ndarray, ranges: np.ndarray = ACTION_RANGES) -> np.ndarray:
    """Map per-dimension tanh outputs in [-1, 1] onto the action ranges."""
    mid = ranges.mean(axis=1)
    half = (ranges[:, 1] - ranges[:, 0]) / 2.0
    return mid + raw * half


def exploration_noise(action: np.ndarray, sigma: np.ndarray | float, rng: np.random.Generator,
                      ranges: np.ndarray = ACTION_RANGES):
    """Gaussian perturbation per dimension, clipped back into the ranges.
    sigma is an absolute per-dimension scale (0 disables)."""
    n = ranges.shape[0]
    sigma = np.broadcast_to(np.asarray(sigma, dtype=float), (n,))
    if np.any(sigma < 0.0):
        raise ValueError("sigma must be >= 0")
    if not np.any(sigma > 0.0):
        return clip_action(np.asarray(action, dtype=float), ranges)
    return clip_action(action + sigma * rng.standard_normal(n), ranges)


@dataclass
class Transition:
    s: np.ndarray
    a: np.ndarray
    r: float
    s_next: np.ndarray
    done: bool


class ReplayBuffer:
    """Uniform-sampling ring buffer; batches are drawn without replacement."""

    def __init__(self, capacity: int, seed: int = 0, obs_dim: int = OBS_DIM, act_dim: int = ACTION_DIM):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = int(capacity)
        self.rng = np.random.default_rng(seed)
        self._alloc = min(self.capacity, 4096)
        self.s = np.zeros((self._alloc, obs_dim))
        self.a = np.zeros((self._alloc, act_dim))
        self.r = np.zeros(self._alloc)
        self.s_next = np.zeros((self._alloc, obs_dim))
        self.done = np.zeros(self._alloc, dtype=bool)
        self.size = 0
        self.head = 0

    def _grow(self):
        new_alloc = min(self.capacity, self._alloc * 2)
        for name in ("s", "a", "r", "s_next", "done"):
            arr = getattr(self, name)
            shape = (new_alloc,) + arr.shape[1:]
            bigger = np.zeros(shape, dtype=arr.dtype)
            bigger[: self._alloc] = arr
            setattr(self, name, bigger)
        self._alloc = new_alloc

    def push(self, tr: Transition):
        if self.head >= self._alloc and self._alloc < self.capacity:
            self._grow()
        i = self.head % self.capacity
        self.s[i] = tr.s
        self.a[i] = tr.a
        self.r[i] = tr.r
        self.s_next[i] = tr.s_next
        self.done[i] = tr.done
        self.head += 1
        self.size = min(self.head, self.capacity)

    def sample(self, batch_size: int):
        if batch_size > self.size:
            raise ValueError("not enough stored transitions")
        idx = self.rng.choice(self.size, size=batch_size, replace=False)
        return (
            self.s[idx].copy(),
            self.a[idx].copy(),
            self.r[idx].copy(),
            self.s_next[idx].copy(),
            self.done[idx].copy(),
        )

    def __len__(self) -> int:
        return self.size


@dataclass
class DdpgConfig:
    hidden: int = 256
    actor_lr: float = 1e-4
    critic_lr: float = 1e-3
    gamma: float = 0.99
    tau: float = 0.005
    batch_size: int = 128
    buffer_capacity: int = 1_000_000
    sigma_scale: float = 0.1  # exploration std as a fraction of each range
    updates_per_decision: int = 1


class DdpgAgent:
    """Online actor/critic plus their target copies and optimizers."""

    def __init__(self, config: DdpgConfig | None = None, seed: int = 0,
                 obs_dim: int = OBS_DIM, act_dim: int = ACTION_DIM,
                 action_ranges: np.ndarray | None = None):
        self.config = config or DdpgConfig()
        self.obs_dim = obs_dim
        self.act_dim = act_dim
        self.ranges = ACTION_RANGES if action_ranges is None else np.asarray(action_ranges, dtype=float)
        if self.ranges.shape != (act_dim, 2):
            raise ValueError("action_ranges must be (act_dim, 2)")
        h = self.config.hidden
        ss = np.random.SeedSequence(seed)
        r_actor, r_critic = [np.random.default_rng(s) for s in ss.spawn(2)]
        self.actor = Mlp([obs_dim, h, h, act_dim], ["relu", "relu", "tanh"], rng=r_actor)
        self.critic = Mlp([obs_dim + act_dim, h, h, 1], ["relu", "relu", "linear"], rng=r_critic)
        # small output layers: actions start near the range midpoints and the
        # initial value estimates near zero
        for net in (self.actor, self.critic):
            net.weights[-1] *= 0.01
            net.biases[-1] *= 0.0
        self.target_actor = self.actor.copy()
        self.target_critic = self.critic.copy()
        self.actor_opt = RmsProp(self.actor.parameters(), lr=self.config.actor_lr)
        self.critic_opt = RmsProp(self.critic.parameters(), lr=self.config.critic_lr)

    # --- inference ---

    def act(self, obs: np.ndarray) -> np.ndarray:
        """Deterministic policy action, squashed into the action ranges."""
        raw = self.actor.forward(np.asarray(obs, dtype=float))
        return clip_action(squash_to_ranges(raw, self.ranges), self.ranges)

    def q_value(self, obs: np.ndarray, action: np.ndarray) -> float | np.ndarray:
        obs = np.asarray(obs, dtype=float)
        action = np.asarray(action, dtype=float)
        x = np.concatenate([obs, action], axis=-1)
        q = self.critic.forward(x)
        return float(q[0]) if q.ndim == 1 else q[:, 0]

    def sigma_vector(self, scale: float | None = None) -> np.ndarray:
        s = self.config.sigma_scale if scale is None else scale
        return s * (self.ranges[:, 1] - self.ranges[:, 0])

    # --- learning ---

    def update(self, batch, gamma: float | None = None, tau: float | None = None):
        """One gradient step on critic and actor plus target soft updates.

        batch is (s, a, r, s_next, done) arrays; returns a diagnostics dict
        with the critic loss and the mean online Q under the current policy.
        """
        gamma = self.config.gamma if gamma is None else gamma
        tau = self.config.tau if tau is None else tau
        s, a, r, s_next, done = batch
        bsz = s.shape[0]
        if bsz == 0:
            raise ValueError("empty batch")

        # critic regression toward the bootstrapped target
        a_next = clip_action(squash_to_ranges(self.target_actor.forward(s_next), self.ranges), self.ranges)
        q_next = self.target_critic.forward(np.concatenate([s_next, a_next], axis=1))[:, 0]
        y = r + gamma * (1.0 - done.astype(float)) * q_next
        x = np.concatenate([s, a], axis=1)
        q, cache = self.critic.forward_cached(x)
        td = q[:, 0] - y
        critic_loss = float(np.mean(td * td))
        wg, bg, _ = self.critic.backward(cache, (2.0 * td / bsz)[:, None])
        self.critic_opt.step(wg + bg)

        # actor ascends the critic's score of its own actions; the ascent
        # direction is rescaled near the output bounds (inverting-gradients
        # bound handling) so the squashed policy cannot pin itself at a range
        # edge on the say-so of an untrained critic
        raw, actor_cache = self.actor.forward_cached(s)
        half = (self.ranges[:, 1] - self.ranges[:, 0]) / 2.0
        a_pi = squash_to_ranges(raw, self.ranges)
        q_pi, critic_cache = self.critic.forward_cached(np.concatenate([s, a_pi], axis=1))
        _, _, dx = self.critic.backward(critic_cache, np.full((bsz, 1), 1.0 / bsz))
        dq_da = dx[:, self.obs_dim :] * half
        bound_scale = np.where(dq_da > 0.0, (1.0 - raw) / 2.0, (1.0 + raw) / 2.0)
        awg, abg, _ = self.actor.backward(actor_cache, -dq_da * bound_scale)
        self.actor_opt.step(awg + abg)

        self.target_actor.soft_update_from(self.actor, tau)
        self.target_critic.soft_update_from(self.critic, tau)

        if not np.isfinite(critic_loss):
            raise FloatingPointError("critic loss became non-finite")
        return {"critic_loss": critic_loss, "actor_q": float(np.mean(q_pi))}


# --- checkpoint archive ---


def _manifest_arrays(net: Mlp, offset: int):
    arrays = []
    k = net.n_layers
    for i, w in enumerate(net.weights):
        arrays.append({"name": f"w{i}", "shape": list(w.shape), "offset": offset})
        offset += w.size * 8
    for i, b in enumerate(net.biases):
        arrays.append({"name": f"b{i}", "shape": list(b.shape), "offset": offset})
        offset += b.size * 8
    return arrays, offset


def save_checkpoint(path, agent: DdpgAgent, meta: dict | None = None, include_critic: bool = True):
    """Write a versioned archive: manifest.json plus row-major little-endian
    float64 parameter blob."""
    nets = {"actor": agent.actor}
    if include_critic:
        nets.update(
            critic=agent.critic, target_actor=agent.target_actor, target_critic=agent.target_critic
        )
    manifest = {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "endianness": "little",
        "dtype": "float64",
        "order": "row-major",
        "obs_dim": agent.obs_dim,
        "action_dim": agent.act_dim,
        "action_ranges": agent.ranges.tolist(),
        "networks": {},
        "meta": meta or {},
    }
    blob = io.BytesIO()
    offset = 0
    for name, net in nets.items():
        arrays, offset = _manifest_arrays(net, offset)
        manifest["networks"][name] = {
            "sizes": net.sizes,
            "activations": net.activations,
            "arrays": arrays,
        }
        for p in net.weights + net.biases:
            blob.write(np.ascontiguousarray(p, dtype="<f8").tobytes())
    with zipfile.ZipFile(path, "w", compression=zipfile.ZIP_DEFLATED) as zf:
        zf.writestr("manifest.json", json.dumps(manifest, indent=1, sort_keys=True))
        zf.writestr("params.bin", blob.getvalue())


class CheckpointError(RuntimeError):
    pass


def _load_net(entry, blob) -> Mlp:
    net = Mlp(entry["sizes"], entry["activations"], rng=0)
    k = net.n_layers
    by_name = {a["name"]: a for a in entry["arrays"]}
    for i in range(k):
        for prefix, target in (("w", net.weights), ("b", net.biases)):
            a = by_name[f"{prefix}{i}"]
            shape = tuple(a["shape"])
            count = int(np.prod(shape))
            flat = np.frombuffer(blob, dtype="<f8", count=count, offset=a["offset"])
            target[i][...] = flat.reshape(shape)
    return net


def load_checkpoint(path, config: DdpgConfig | None = None) -> DdpgAgent:
    """Rebuild an agent from the archive; missing critic/target sections fall
    back to fresh copies (enough for inference-only checkpoints)."""
    try:
        with zipfile.ZipFile(path) as zf:
            manifest = json.loads(zf.read("manifest.json"))
            blob = zf.read("params.bin")
    except (OSError, zipfile.BadZipFile, KeyError) as exc:
        raise CheckpointError(f"unreadable checkpoint {path}: {exc}") from exc
    if manifest.get("format") != CHECKPOINT_FORMAT:
        raise CheckpointError(f"not a {CHECKPOINT_FORMAT} archive")
    if manifest.get("version") != CHECKPOINT_VERSION:
        raise CheckpointError(f"unsupported checkpoint version {manifest.get('version')}")
    if manifest.get("endianness") != "little":
        raise CheckpointError("unsupported endianness tag")
    nets = manifest["networks"]
    actor = _load_net(nets["actor"], blob)
    cfg = config or DdpgConfig(hidden=actor.sizes[1])
    ranges = np.asarray(manifest.get("action_ranges", ACTION_RANGES), dtype=float)
    agent = DdpgAgent(cfg, seed=0, obs_dim=actor.sizes[0], act_dim=actor.sizes[-1],
                      action_ranges=ranges)
    agent.actor = actor
    agent.target_actor = _load_net(nets["target_actor"], blob) if "target_actor" in nets else actor.copy()
    if "critic" in nets:
        agent.critic = _load_net(nets["critic"], blob)
        agent.target_critic = (
            _load_net(nets["target_critic"], blob) if "target_critic" in nets else agent.critic.copy()
        )
    agent.actor_opt = RmsProp(agent.actor.parameters(), lr=cfg.actor_lr)
    agent.critic_opt = RmsProp(agent.critic.parameters(), lr=cfg.critic_lr)
    return agent

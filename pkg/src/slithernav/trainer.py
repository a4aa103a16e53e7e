"""Training loop for the local-navigation policy.

Single-threaded mode is the deterministic reference: one environment, one
learner, updates interleaved with collection. With workers > 1, episodes are
collected by threads running frozen actor snapshots (the physics kernel
releases the GIL) while the main thread owns the replay buffer and all
network updates.
"""

from __future__ import annotations

import logging
import queue
import threading
from dataclasses import dataclass

import numpy as np

from .config import RunConfig
from .ddpg import DdpgAgent, ReplayBuffer, Transition, exploration_noise
from .envs import LocalNavEnv
from .sim import SimulationAborted

log = logging.getLogger(__name__)


@dataclass
class EpisodeResult:
    episode: int
    ret: float
    steps: int
    seed: int
    aborted: bool = False


class RewardLog:
    """CSV log: episode, return, steps, seed (one row per episode)."""

    def __init__(self, path):
        self.path = path
        self._fh = open(path, "w", encoding="utf-8")
        self._fh.write("episode,return,steps,seed\n")

    def add(self, res: EpisodeResult):
        self._fh.write(f"{res.episode},{res.ret!r},{res.steps},{res.seed}\n")
        self._fh.flush()

    def close(self):
        self._fh.close()


def sigma_schedule(base: float, episode: int, decay_episodes: int) -> float:
    """Linear decay of the exploration scale to zero."""
    if decay_episodes <= 0:
        return base
    return base * max(0.0, 1.0 - episode / decay_episodes)


def _collect_episode(env: LocalNavEnv, agent: DdpgAgent, sigma: float, rng) -> tuple[list, EpisodeResult, bool]:
    """One episode with the given (frozen) agent; returns transitions and stats."""
    transitions = []
    obs = env.reset()
    ep_return = 0.0
    steps = 0
    aborted = False
    for _ in range(env.horizon):
        action = exploration_noise(agent.act(obs), agent.sigma_vector(sigma), rng)
        try:
            obs2, r, done, _ = env.step(action)
        except SimulationAborted as exc:
            log.warning("episode aborted: %s", exc)
            aborted = True
            break
        transitions.append(Transition(obs, action, r, obs2, done))
        ep_return += r
        steps += 1
        obs = obs2
    return transitions, ep_return, steps, aborted


def train(config: RunConfig, out_dir, seed: int | None = None, episodes: int | None = None,
          workers: int | None = None, progress=None):
    """Run training; writes checkpoint.ckpt, rewards.csv and config.snapshot
    under out_dir. Returns (agent, list of EpisodeResult)."""
    import os

    os.makedirs(out_dir, exist_ok=True)
    seed = config["seed"] if seed is None else seed
    episodes = config["rl.episodes"] if episodes is None else episodes
    workers = config["rl.workers"] if workers is None else workers
    decay = config["rl.sigma_decay_episodes"] or episodes
    agent = DdpgAgent(config.ddpg_config(), seed=seed)
    buffer = ReplayBuffer(config["rl.buffer_capacity"], seed=seed + 1)
    batch = config["rl.batch_size"]
    upd = config["rl.updates_per_decision"]
    sigma0 = config["rl.sigma_scale"]
    log_path = os.path.join(out_dir, "rewards.csv")
    rlog = RewardLog(log_path)
    config.save(os.path.join(out_dir, "config.snapshot"))
    results = []

    def learn_from(transitions):
        for tr in transitions:
            buffer.push(tr)
            if len(buffer) >= batch:
                for _ in range(upd):
                    agent.update(buffer.sample(batch))

    if workers <= 1:
        env = LocalNavEnv(config, seed=seed + 100)
        rng = np.random.default_rng(seed + 200)
        for ep in range(episodes):
            sigma = sigma_schedule(sigma0, ep, decay)
            transitions, ep_return, steps, aborted = _collect_episode(env, agent, sigma, rng)
            learn_from(transitions)
            res = EpisodeResult(ep, ep_return, steps, seed, aborted)
            results.append(res)
            rlog.add(res)
            if progress:
                progress(res)
    else:
        results = _train_threaded(
            config, agent, learn_from, rlog, episodes, workers, seed, sigma0, decay, progress
        )
    rlog.close()
    from .ddpg import save_checkpoint

    ckpt = os.path.join(out_dir, "checkpoint.ckpt")
    save_checkpoint(ckpt, agent, meta={"episodes": episodes, "seed": seed})
    return agent, results


def _train_threaded(config, agent, learn_from, rlog, episodes, workers, seed, sigma0, decay,
                    progress):
    """Thread-parallel collection; buffer writes and updates stay on this
    thread. Episode ordering (and therefore the log) is nondeterministic."""
    results = []
    out_q: queue.Queue = queue.Queue(maxsize=workers * 2)
    todo = iter(range(episodes))
    todo_lock = threading.Lock()
    snapshot_lock = threading.Lock()

    def next_episode():
        with todo_lock:
            return next(todo, None)

    def worker(wid: int):
        env = LocalNavEnv(config, seed=seed + 100 + wid)
        rng = np.random.default_rng(seed + 500 + wid)
        while True:
            ep = next_episode()
            if ep is None:
                break
            with snapshot_lock:
                frozen = DdpgAgent(agent.config, seed=0, obs_dim=agent.obs_dim,
                                   act_dim=agent.act_dim, action_ranges=agent.ranges)
                frozen.actor = agent.actor.copy()
            sigma = sigma_schedule(sigma0, ep, decay)
            out_q.put((ep, *_collect_episode(env, frozen, sigma, rng)))
        out_q.put(None)

    threads = [threading.Thread(target=worker, args=(w,), daemon=True) for w in range(workers)]
    for th in threads:
        th.start()
    finished_workers = 0
    while finished_workers < workers:
        item = out_q.get()
        if item is None:
            finished_workers += 1
            continue
        ep, transitions, ep_return, steps, aborted = item
        with snapshot_lock:
            learn_from(transitions)
        res = EpisodeResult(ep, ep_return, steps, seed, aborted)
        results.append(res)
        rlog.add(res)
        if progress:
            progress(res)
    for th in threads:
        th.join()
    results.sort(key=lambda r: r.episode)
    return results

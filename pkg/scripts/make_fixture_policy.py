"""Build the committed fixture policy checkpoint.

A scripted steering law (calibrated against the gait characterization in
gait_cycles.py) is rolled out against random goals; the actor network is
regression-fitted to it and validated closed loop before saving. The
resulting checkpoint drives the committed integration tasks, so it must be
deterministic and competent at waypoint homing, independent of any training
run.

Usage: PYTHONPATH=src python3 scripts/make_fixture_policy.py --out tests/data/fixture_policy.ckpt
"""

import argparse

import numpy as np

from slithernav.config import RunConfig
from slithernav.ddpg import ACTION_RANGES, DdpgAgent, DdpgConfig, save_checkpoint
from slithernav.geometry import wrap_angle
from slithernav.nn import RmsProp
from slithernav.sim import GaitSimulator, goal_frame

# gait period locked to the decision period (2 s) so decision-boundary
# observations sample a fixed gait phase. The teacher pins omega at the top
# of its range: the actor's tanh output saturates there, which keeps the
# cloned policy's gait period exact (an interior omega would jitter with
# network error and de-synchronize the phase-locked bearing reference).
TEACHER_OMEGA = 0.1
OMEGA_SCALE = float(np.pi / TEACHER_OMEGA)
CHI = np.radians(-97.1)  # travel bearing of the base gait in the head frame
K_STEER = 2.0
DTH_MAX = 0.6
BASE = dict(r1=0.6, r2=1.45, theta=2.4)


def teacher_action(obs: np.ndarray) -> np.ndarray:
    psi = np.arctan2(obs[15], obs[14])
    err = wrap_angle(psi - CHI)
    dth = float(np.clip(K_STEER * err, -DTH_MAX, DTH_MAX))
    return np.array(
        [
            BASE["r1"],
            BASE["r2"],
            TEACHER_OMEGA,
            np.clip(BASE["theta"] - 0.5 * dth, -np.pi, np.pi),
            np.clip(BASE["theta"] + 0.5 * dth, -np.pi, np.pi),
            0.0,
            0.0,
        ]
    )


def fixture_config() -> RunConfig:
    return RunConfig.defaults(**{"cpg.omega_scale": OMEGA_SCALE})


def collect(cfg, n_goals, seed, noise_prob=0.2, noise_scale=0.3, max_decisions=60):
    """Roll the teacher against random goals; label every visited observation
    with the teacher action (executed actions are sometimes perturbed so the
    dataset covers off-policy states)."""
    rng = np.random.default_rng(seed)
    sim = GaitSimulator(cfg)
    obs_rows, act_rows = [], []
    ticks = cfg.ticks_per_decision
    for _ in range(n_goals):
        sim.reset()
        ang = rng.uniform(-np.pi, np.pi)
        dist = rng.uniform(0.6, 4.0)
        goal_xy = dist * np.array([np.cos(ang), np.sin(ang)])
        gp, gr = goal_frame(sim.state.head_position(sim.model), goal_xy)
        for _ in range(max_decisions):
            obs = sim.observe(gp, gr)
            label = teacher_action(obs)
            obs_rows.append(obs)
            act_rows.append(label)
            exec_action = label.copy()
            if rng.uniform() < noise_prob:
                bump = rng.normal(0.0, noise_scale)
                exec_action[3] = np.clip(exec_action[3] - 0.5 * bump, -np.pi, np.pi)
                exec_action[4] = np.clip(exec_action[4] + 0.5 * bump, -np.pi, np.pi)
            sim.set_gait(exec_action)
            sim.run_ticks(ticks)
            if np.linalg.norm(gp[:2] - sim.head_planar_position()) < 0.3:
                break
    return np.array(obs_rows), np.array(act_rows)


OMEGA_Z_TARGET = 6.0  # pre-activation target: tanh(6) = 0.99998


def fit_actor(agent, obs, act, seed, iters=8000, batch=256, lr=1e-3):
    """Regress the actor's tanh output onto the normalized teacher actions.

    The omega column is driven toward a saturated pre-activation instead of
    a tanh value so the cloned gait period stays exact (see TEACHER_OMEGA).
    """
    rng = np.random.default_rng(seed)
    mid = ACTION_RANGES.mean(axis=1)
    half = (ACTION_RANGES[:, 1] - ACTION_RANGES[:, 0]) / 2.0
    targets = (act - mid) / half
    opt = RmsProp(agent.actor.parameters(), lr=lr)
    n = obs.shape[0]
    for it in range(iters):
        idx = rng.integers(0, n, batch)
        y, cache = agent.actor.forward_cached(obs[idx])
        err = y - targets[idx]
        # omega column: gradient of (z - z*)^2/2 expressed w.r.t. y = tanh(z);
        # the 1/(1 - y^2) factor cancels the vanishing tanh derivative
        # (clamped so a saturated initialization cannot blow the step up)
        z = np.arctanh(np.clip(y[:, 2], -1 + 1e-9, 1 - 1e-9))
        err[:, 2] = np.clip(0.05 * (z - OMEGA_Z_TARGET) / (1.0 - y[:, 2] ** 2 + 1e-6), -1.0, 1.0)
        wg, bg, _ = agent.actor.backward(cache, err / batch)
        opt.step(wg + bg)
        if (it + 1) % 2000 == 0:
            full = agent.actor.forward(obs)
            rms = np.sqrt(np.mean((np.delete(full, 2, axis=1) - np.delete(targets, 2, axis=1)) ** 2))
            om_err = np.abs(full[:, 2] - 1.0).max()
            print(f"  iter {it + 1}: rms={rms:.5f} omega_gap={om_err:.2e}")
    return agent


def validate(cfg, agent, bearings=range(0, 360, 45), dist=3.0, budget=150.0):
    ticks = cfg.ticks_per_decision
    wins = 0
    times = []
    for b in bearings:
        sim = GaitSimulator(cfg)
        sim.reset()
        ang = np.radians(b)
        gp, gr = goal_frame(
            sim.state.head_position(sim.model), dist * np.array([np.cos(ang), np.sin(ang)])
        )
        t = 0.0
        ok = False
        while t < budget:
            sim.set_gait(agent.act(sim.observe(gp, gr)))
            sim.run_ticks(ticks)
            t += cfg["rl.decision_period"]
            if np.linalg.norm(gp[:2] - sim.head_planar_position()) < 0.3:
                ok = True
                break
        wins += ok
        times.append(f"{t:.0f}" if ok else "--")
    print(f"closed-loop validation: {wins}/{len(times)} reached, times {times}")
    return wins == len(times)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="tests/data/fixture_policy.ckpt")
    ap.add_argument("--goals", type=int, default=400)
    ap.add_argument("--seed", type=int, default=2024)
    args = ap.parse_args()
    cfg = fixture_config()
    print(f"collecting teacher rollouts ({args.goals} goals)...")
    obs, act = collect(cfg, args.goals, args.seed)
    print(f"dataset: {obs.shape[0]} decisions")
    agent = DdpgAgent(DdpgConfig(), seed=args.seed)
    fit_actor(agent, obs, act, args.seed + 1)
    if not validate(cfg, agent):
        raise SystemExit("fixture policy failed closed-loop validation; not saving")
    save_checkpoint(
        args.out,
        agent,
        meta={
            "kind": "fixture-policy",
            "omega_scale": OMEGA_SCALE,
            "recipe": "behaviour cloning of the scripted steering teacher",
            "seed": args.seed,
        },
        include_critic=False,
    )
    print(f"saved {args.out}")


if __name__ == "__main__":
    main()

"""Characterize net CoM motion over the gait-parameter space.

For each parameter set, run a fixed-horizon rollout from rest and report net
displacement (in the initial heading frame), drift angle, and heading change.
Used to pick locomotion/steering primitives for the scripted teacher.
"""

import argparse
import itertools
import sys

import numpy as np

from slithernav.config import RunConfig
from slithernav.sim import GaitSimulator


def rollout(cfg, action, seconds, ticks_chunk=100):
    sim = GaitSimulator(cfg)
    sim.reset()
    sim.set_gait(np.asarray(action, dtype=float))
    com0 = None
    n_ticks = int(round(seconds / cfg.control_dt))
    recs = []
    done = 0
    while done < n_ticks:
        chunk = min(ticks_chunk, n_ticks - done)
        recs.extend(sim.run_ticks(chunk))
        done += chunk
    com_start = recs[0].com[:2]
    com_end = recs[-1].com[:2]
    disp = com_end - com_start
    yaw_end = sim.state.q[sim.model.ndof - 1]
    return {
        "disp": disp,
        "dist": float(np.linalg.norm(disp)),
        "dir": float(np.degrees(np.arctan2(disp[1], disp[0]))),
        "yaw_deg": float(np.degrees(yaw_end)),
        "gimbal": sim.gimbal_count,
        "head_z": float(sim.state.q[sim.model.n_joints + 2]),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seconds", type=float, default=60.0)
    ap.add_argument("--omega-scale", type=float, default=1.0)
    ap.add_argument("--mode", default="coarse", choices=["coarse", "steer", "fine"])
    args = ap.parse_args()

    cfg = RunConfig.defaults(**{"cpg.omega_scale": args.omega_scale})

    if args.mode == "coarse":
        grid = itertools.product(
            [0.4, 0.8, 1.2],      # R1 pitch amplitude
            [0.4, 0.8, 1.2],      # R2 yaw amplitude
            [0.1, -0.1],          # omega
            [0.6, 1.5, 3.0, -1.5],  # theta1 = theta2
        )
        print("R1   R2   om    th    | dist    dir     yaw     headz gimbal")
        for r1, r2, om, th in grid:
            res = rollout(cfg, [r1, r2, om, th, th, 0.0, 0.0], args.seconds)
            print(
                f"{r1:.1f}  {r2:.1f}  {om:+.1f}  {th:+.1f}  | "
                f"{res['dist']:.3f}  {res['dir']:+7.1f}  {res['yaw_deg']:+7.1f}  "
                f"{res['head_z']:+.3f} {res['gimbal']}"
            )
    elif args.mode == "steer":
        base = [float(x) for x in sys.stdin.readline().split()] if not sys.stdin.isatty() else None
        r1, r2, om, th = base if base else (0.8, 0.8, 0.1, 1.5)
        print(f"base gait: R1={r1} R2={r2} om={om} th={th}")
        print("d2     | dist    dir     yaw")
        for d2 in [-0.1, -0.05, 0.0, 0.05, 0.1]:
            res = rollout(cfg, [r1, r2, om, th, th, 0.0, d2], args.seconds)
            print(f"{d2:+.2f}  | {res['dist']:.3f}  {res['dir']:+7.1f}  {res['yaw_deg']:+7.1f}")
        print("th2-th1 split")
        for th2 in [th - 1.0, th - 0.5, th, th + 0.5, th + 1.0]:
            res = rollout(cfg, [r1, r2, om, th, th2, 0.0, 0.0], args.seconds)
            print(f"th2={th2:+.2f} | {res['dist']:.3f}  {res['dir']:+7.1f}  {res['yaw_deg']:+7.1f}")
    else:
        print("fine sweep around promising region")
        for r1 in [0.6, 0.8, 1.0, 1.2]:
            for th in [1.0, 1.5, 2.0, 2.5, 3.0]:
                res = rollout(cfg, [r1, 1.2, 0.1, th, th, 0.0, 0.0], args.seconds)
                print(f"R1={r1:.1f} th={th:.1f} | {res['dist']:.3f} dir={res['dir']:+7.1f} yaw={res['yaw_deg']:+7.1f}")


if __name__ == "__main__":
    main()

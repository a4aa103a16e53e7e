"""Steady-state per-cycle gait statistics.

Runs N gait cycles, discards the transient, and reports per-cycle CoM step
(magnitude + direction drift between consecutive cycles) and head-yaw drift.
A navigable base gait has consistent step direction and near-zero rotation;
a steering knob must shift the rotation sign monotonically.
"""

import argparse
import itertools

import numpy as np

from slithernav.config import RunConfig
from slithernav.geometry import wrap_angle
from slithernav.sim import GaitSimulator


def cycle_stats(cfg, action, n_cycles=10, skip=3):
    omega_eff = abs(action[2]) * cfg["cpg.omega_scale"]
    period = 2 * np.pi / omega_eff
    ticks_per_cycle = int(round(period / cfg.control_dt))
    sim = GaitSimulator(cfg)
    sim.reset()
    sim.set_gait(np.asarray(action, dtype=float))
    com_marks = []
    yaw_marks = []
    for c in range(n_cycles):
        recs = sim.run_ticks(ticks_per_cycle)
        com_marks.append(recs[-1].com[:2].copy())
        yaw_marks.append(sim.state.q[sim.model.ndof - 1])
    steps = np.diff(np.array(com_marks[skip:]), axis=0)
    mags = np.linalg.norm(steps, axis=1)
    dirs = np.arctan2(steps[:, 1], steps[:, 0])
    turn = np.array([wrap_angle(b - a) for a, b in zip(dirs, dirs[1:])])
    yawd = np.array([wrap_angle(b - a) for a, b in zip(yaw_marks[skip:], yaw_marks[skip + 1 :])])
    return {
        "step_m": float(np.mean(mags)),
        "step_sd": float(np.std(mags)),
        "turn_deg": float(np.degrees(np.mean(turn))),
        "turn_sd": float(np.degrees(np.std(turn))),
        "yaw_deg": float(np.degrees(np.mean(yawd))),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--omega-scale", type=float, default=10.0)
    ap.add_argument("--r1", type=float, default=None)
    ap.add_argument("--r2", type=float, default=None)
    ap.add_argument("--theta", type=float, default=None)
    ap.add_argument("--steer", action="store_true")
    args = ap.parse_args()
    cfg = RunConfig.defaults(**{"cpg.omega_scale": args.omega_scale})

    if not args.steer:
        print("R1   R2   th    | step(m)  sd     turn/cyc  sd      yaw/cyc")
        for r1, r2, th in itertools.product(
            [0.4, 0.8, 1.2], [0.8, 1.2, 1.5], [0.6, 1.2, 1.8, 2.4, 3.0, -1.2, -2.4]
        ):
            s = cycle_stats(cfg, [r1, r2, 0.1, th, th, 0.0, 0.0])
            print(
                f"{r1:.1f}  {r2:.1f}  {th:+.1f}  | {s['step_m']:.3f}    {s['step_sd']:.3f}  "
                f"{s['turn_deg']:+8.1f}  {s['turn_sd']:6.1f}  {s['yaw_deg']:+8.1f}"
            )
    else:
        r1, r2, th = args.r1, args.r2, args.theta
        print(f"steering around R1={r1} R2={r2} th={th}")
        print("d2     | step(m)  turn/cyc  sd      yaw/cyc")
        for d2 in [-0.1, -0.06, -0.03, 0.0, 0.03, 0.06, 0.1]:
            s = cycle_stats(cfg, [r1, r2, 0.1, th, th, 0.0, d2])
            print(f"{d2:+.2f}  | {s['step_m']:.3f}    {s['turn_deg']:+8.1f}  {s['turn_sd']:6.1f}  {s['yaw_deg']:+8.1f}")
        print("d1 (pitch offset)")
        for d1 in [-0.1, -0.05, 0.05, 0.1]:
            s = cycle_stats(cfg, [r1, r2, 0.1, th, th, d1, 0.0])
            print(f"{d1:+.2f}  | {s['step_m']:.3f}    {s['turn_deg']:+8.1f}  {s['turn_sd']:6.1f}  {s['yaw_deg']:+8.1f}")
        print("theta2 split (th2 != th1)")
        for dth in [-0.8, -0.4, 0.4, 0.8]:
            s = cycle_stats(cfg, [r1, r2, 0.1, th, th + dth, 0.0, 0.0])
            print(f"dth={dth:+.1f} | {s['step_m']:.3f}    {s['turn_deg']:+8.1f}  {s['turn_sd']:6.1f}  {s['yaw_deg']:+8.1f}")


if __name__ == "__main__":
    main()

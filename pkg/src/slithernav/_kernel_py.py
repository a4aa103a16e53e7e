"""Pure-numpy simulation kernels.

Reference implementation of the hot inner loops. `slithernav._core` (Cython)
mirrors these functions one-to-one; `slithernav.backend` picks whichever is
importable. All functions take a "model pack" tuple of plain arrays so both
backends share a single calling convention:

    pack = (n_joints, axes (n,3), jpos (n,3), com (nb,3), mass (nb,),
            inertia (nb,3,3))

with nb = n_joints + 1 bodies (body 0 is the head), plus contact geometry
(cbody (nc,) int32, coff (nc,3)). Generalized coordinates are ordered
[joint angles, head position, head Euler angles].
"""

from __future__ import annotations

import numpy as np

from .geometry import (
    euler_rate_bias,
    euler_rate_matrix,
    euler_rotation,
    rodrigues,
    wrap_angle,
)

NAME = "python"

GIMBAL_MARGIN = 0.01  # clamp |pitch| at pi/2 - margin


def kinematics(pack, q):
    """World rotation, frame origin and CoM position for every body."""
    n, axes, jpos, com, mass, inertia = pack
    nb = n + 1
    r = np.empty((nb, 3, 3))
    d = np.empty((nb, 3))
    pcm = np.empty((nb, 3))
    r[0] = euler_rotation(q[n + 3 : n + 6])
    d[0] = q[n : n + 3]
    pcm[0] = d[0] + r[0] @ com[0]
    for j in range(1, nb):
        r[j] = r[j - 1] @ rodrigues(axes[j - 1], q[j - 1])
        d[j] = d[j - 1] + r[j - 1] @ jpos[j - 1]
        pcm[j] = d[j] + r[j] @ com[j]
    return r, d, pcm


def _world_axes(pack, r):
    """World direction of each joint axis (rotates with the parent body)."""
    n, axes = pack[0], pack[1]
    return np.einsum("jab,jb->ja", r[:n], axes)


def point_jacobians(pack, q, r, d, pts, bodies):
    """Linear-velocity Jacobians (np, 3, ndof) for world points fixed to bodies."""
    n = pack[0]
    ndof = n + 6
    aw = _world_axes(pack, r)  # (n, 3)
    o = d[1:]  # joint j origin is body j's frame origin
    ph = q[n : n + 3]
    e = euler_rate_matrix(q[n + 3 : n + 6])
    pts = np.asarray(pts, dtype=float)
    bodies = np.asarray(bodies, dtype=np.int64)
    npts = pts.shape[0]
    jac = np.zeros((npts, 3, ndof))
    if n:
        rel = pts[:, None, :] - o[None, :, :]  # (np, n, 3)
        cols = np.cross(np.broadcast_to(aw, rel.shape), rel)  # (np, n, 3)
        mask = np.arange(1, n + 1)[None, :] <= bodies[:, None]  # joint j moves body >= j
        jac[:, :, :n] = np.where(mask[:, None, :], cols.transpose(0, 2, 1), 0.0)
    jac[:, :, n : n + 3] = np.eye(3)
    rel_h = pts - ph
    # head rotation sweeps every point: omega_H x (p - p_H)
    for k in range(3):
        jac[:, :, n + 3 + k] = np.cross(e[:, k], rel_h)
    return jac


def body_jacobians(pack, q):
    """(Jv, beta): linear and angular velocity maps for every body CoM."""
    n = pack[0]
    nb = n + 1
    ndof = n + 6
    r, d, pcm = kinematics(pack, q)
    jv = point_jacobians(pack, q, r, d, pcm, np.arange(nb))
    beta = np.zeros((nb, 3, ndof))
    aw = _world_axes(pack, r)
    if n:
        mask = np.arange(1, n + 1)[None, :] <= np.arange(nb)[:, None]
        beta[:, :, :n] = np.where(mask[:, None, :], aw.T[None, :, :], 0.0)
    beta[:, :, n + 3 :] = euler_rate_matrix(q[n + 3 : n + 6])
    return jv, beta


def _bias_accelerations(pack, q, qd, r, d):
    """Angular velocity, and angular/CoM accelerations at zero coordinate
    acceleration, for every body (forward propagation along the chain)."""
    n, axes, jpos, com = pack[0], pack[1], pack[2], pack[3]
    nb = n + 1
    euler = q[n + 3 : n + 6]
    euler_d = qd[n + 3 : n + 6]
    omega = np.empty((nb, 3))
    alpha = np.empty((nb, 3))
    acm = np.empty((nb, 3))
    omega[0] = euler_rate_matrix(euler) @ euler_d
    alpha[0] = euler_rate_bias(euler, euler_d)
    ad = np.zeros(3)  # head origin acceleration is p_H'' = 0
    rc = r[0] @ com[0]
    acm[0] = ad + np.cross(alpha[0], rc) + np.cross(omega[0], np.cross(omega[0], rc))
    for j in range(1, nb):
        a_w = r[j - 1] @ axes[j - 1]
        omega[j] = omega[j - 1] + qd[j - 1] * a_w
        alpha[j] = alpha[j - 1] + qd[j - 1] * np.cross(omega[j - 1], a_w)
        off = r[j - 1] @ jpos[j - 1]
        ad = ad + np.cross(alpha[j - 1], off) + np.cross(omega[j - 1], np.cross(omega[j - 1], off))
        rc = r[j] @ com[j]
        acm[j] = ad + np.cross(alpha[j], rc) + np.cross(omega[j], np.cross(omega[j], rc))
    return omega, alpha, acm


def dynamics(pack, q, qd, gravity):
    """Mass matrix D and bias vector H (Coriolis/centrifugal + gravity).

    D comes from summing each body's translational and rotational kinetic
    energy metric; H from Newton-Euler bias forces pulled back through the
    body Jacobians, so that D qdd + H = generalized applied forces.
    """
    n, _, _, _, mass, inertia = pack
    nb = n + 1
    ndof = n + 6
    r, d, pcm = kinematics(pack, q)
    jv = point_jacobians(pack, q, r, d, pcm, np.arange(nb))
    beta = np.zeros((nb, 3, ndof))
    aw = _world_axes(pack, r)
    if n:
        mask = np.arange(1, n + 1)[None, :] <= np.arange(nb)[:, None]
        beta[:, :, :n] = np.where(mask[:, None, :], aw.T[None, :, :], 0.0)
    beta[:, :, n + 3 :] = euler_rate_matrix(q[n + 3 : n + 6])

    iw = np.einsum("bij,bjk,blk->bil", r, inertia, r)  # R I R^T
    dmat = np.einsum("bri,b,brj->ij", jv, mass, jv)
    iwb = np.einsum("brs,bsj->brj", iw, beta)
    dmat = dmat + np.einsum("bri,brj->ij", beta, iwb)

    omega, alpha, acm = _bias_accelerations(pack, q, qd, r, d)
    h = np.zeros(ndof)
    for b in range(nb):
        f = mass[b] * acm[b]
        f[2] += mass[b] * gravity  # moving gravity to the left-hand side
        tau = iw[b] @ alpha[b] + np.cross(omega[b], iw[b] @ omega[b])
        h += jv[b].T @ f + beta[b].T @ tau
    return dmat, h


def contact_points(pack, q, cbody, coff):
    """World positions of the contact points."""
    r, d, _ = kinematics(pack, q)
    return d[cbody] + np.einsum("pab,pb->pa", r[cbody], coff)


def contact_state(pack, q, qd, cbody, coff):
    """World position and velocity of every contact point."""
    r, d, _ = kinematics(pack, q)
    pts = d[cbody] + np.einsum("pab,pb->pa", r[cbody], coff)
    jac = point_jacobians(pack, q, r, d, pts, cbody)
    vel = np.einsum("pri,i->pr", jac, qd)
    return pts, vel


def contact_jacobian(pack, q, cbody, coff):
    """Stacked (3*nc, ndof) Jacobian of all contact points."""
    r, d, _ = kinematics(pack, q)
    pts = d[cbody] + np.einsum("pab,pb->pa", r[cbody], coff)
    jac = point_jacobians(pack, q, r, d, pts, cbody)
    return jac.reshape(-1, pack[0] + 6)


def _ground_forces(ground, pts, vel, dt, m_eff):
    """Vectorized ground model over (nc, 3) points/velocities.

    The sgn-regularization width is widened per point whenever the tanh
    boundary-layer slope s*fz/v_eps would exceed the explicit-integration
    stability limit ~m_eff/dt (otherwise the friction term chatters at a
    period-2 cycle). Outside the layer tanh is saturated, so the sliding
    regime is unaffected.
    """
    k1, k2, mu_c, mu_s, mu_v, v_s, v_eps = ground
    pz = pts[:, 2]
    vz = vel[:, 2]
    engaged = pz <= 0.0
    fz = np.where(engaged, -k1 * pz - k2 * vz, 0.0)
    fz = np.maximum(fz, 0.0)
    slope_max = 0.5 * m_eff / dt
    f = np.zeros_like(pts)
    for i in range(2):
        vi = vel[:, i]
        s = mu_c - (mu_c - mu_s) * np.exp(-(vi * vi) / (v_s * v_s))
        v_reg = np.maximum(v_eps, s * fz / slope_max)
        f[:, i] = np.where(engaged, -s * fz * np.tanh(vi / v_reg) - mu_v * vi, 0.0)
    f[:, 2] = fz
    return f


def _wall_forces(walls, ground, pts, vel):
    """Spring-damper push-out of points inside occupied grid cells.

    Occupied cells act as vertical penalty volumes; the force acts along the
    outward normal of the nearest face that borders a free cell. No
    tangential term.
    """
    occ, ox, oy, cs = walls
    k1, k2 = ground[0], ground[1]
    h, w = occ.shape  # rows = y, cols = x
    f = np.zeros_like(pts)
    for p in range(pts.shape[0]):
        x, y = pts[p, 0], pts[p, 1]
        ix = int(np.floor((x - ox) / cs))
        iy = int(np.floor((y - oy) / cs))
        if ix < 0 or iy < 0 or ix >= w or iy >= h or not occ[iy, ix]:
            continue
        best_depth = np.inf
        best_axis = -1
        best_sign = 0.0
        # +x face
        if ix + 1 < w and not occ[iy, ix + 1]:
            depth = (ox + (ix + 1) * cs) - x
            if depth < best_depth:
                best_depth, best_axis, best_sign = depth, 0, 1.0
        if ix - 1 >= 0 and not occ[iy, ix - 1]:
            depth = x - (ox + ix * cs)
            if depth < best_depth:
                best_depth, best_axis, best_sign = depth, 0, -1.0
        if iy + 1 < h and not occ[iy + 1, ix]:
            depth = (oy + (iy + 1) * cs) - y
            if depth < best_depth:
                best_depth, best_axis, best_sign = depth, 1, 1.0
        if iy - 1 >= 0 and not occ[iy - 1, ix]:
            depth = y - (oy + iy * cs)
            if depth < best_depth:
                best_depth, best_axis, best_sign = depth, 1, -1.0
        if best_axis < 0:
            continue  # deep inside a wall block; no free face adjacent
        vn = best_sign * vel[p, best_axis]
        mag = max(k1 * best_depth - k2 * vn, 0.0)
        f[p, best_axis] += best_sign * mag
    return f


def _step_once(pack, ground, walls, q, qd, u, dt, gravity, cbody, coff):
    n = pack[0]
    dmat, h = dynamics(pack, q, qd, gravity)
    rhs = -h
    if u is not None:
        rhs[:n] += u
    if ground is not None and cbody.size:
        m_eff = float(np.sum(pack[4])) / cbody.shape[0]
        r, d, _ = kinematics(pack, q)
        pts = d[cbody] + np.einsum("pab,pb->pa", r[cbody], coff)
        jac = point_jacobians(pack, q, r, d, pts, cbody)
        vel = np.einsum("pri,i->pr", jac, qd)
        forces = _ground_forces(ground, pts, vel, dt, m_eff)
        if walls is not None:
            forces = forces + _wall_forces(walls, ground, pts, vel)
        rhs += np.einsum("pri,pr->i", jac, forces)
    qdd = np.linalg.solve(dmat, rhs)
    qd = qd + dt * qdd
    q = q + dt * qd
    return q, qd


def _normalize_head(q, qd, n):
    """Wrap Euler angles and clamp pitch away from the gimbal singularity.

    Returns the number of clamp events (0 or 1). The pitch rate is zeroed on
    clamp so the guard acts as an inelastic stop.
    """
    q[n + 3] = wrap_angle(q[n + 3])
    q[n + 5] = wrap_angle(q[n + 5])
    lim = np.pi / 2.0 - GIMBAL_MARGIN
    if abs(q[n + 4]) > lim:
        q[n + 4] = lim if q[n + 4] > 0.0 else -lim
        qd[n + 4] = 0.0
        return 1
    return 0


def physics_steps(pack, ground, walls, q, qd, u, n_steps, dt, gravity, cbody, coff):
    """Advance (q, qd) by n_steps semi-implicit Euler steps under constant
    joint torque u. Returns (q, qd, gimbal_count, steps_done, ok)."""
    n = pack[0]
    q = np.array(q, dtype=float)
    qd = np.array(qd, dtype=float)
    gimbal = 0
    for k in range(n_steps):
        q, qd = _step_once(pack, ground, walls, q, qd, u, dt, gravity, cbody, coff)
        gimbal += _normalize_head(q, qd, n)
        if not (np.all(np.isfinite(q)) and np.all(np.isfinite(qd))):
            return q, qd, gimbal, k + 1, False
    return q, qd, gimbal, n_steps, True


def control_ticks(
    pack,
    ground,
    walls,
    q,
    qd,
    targets,
    gains,
    pid_integ,
    pid_prev,
    n_sub,
    dt,
    gravity,
    cbody,
    coff,
):
    """Fused gait-tracking loop: for each control tick, hold the tick's joint
    targets and run n_sub physics steps with per-step PID torque.

    Returns (q, qd, pid_integ, pid_prev, rec_joints, rec_com, rec_head,
    head_v_prev, gimbal_count, ticks_done, ok). rec_* are per-tick samples
    taken after the tick's last physics step; head_v_prev is the head linear
    velocity one physics step before the end (for finite-difference
    accelerometer readings).
    """
    n, _, _, _, mass, _ = pack
    q = np.array(q, dtype=float)
    qd = np.array(qd, dtype=float)
    pid_integ = np.array(pid_integ, dtype=float)
    pid_prev = np.array(pid_prev, dtype=float)
    kp, ki, kd, u_max, i_max = gains
    nticks = targets.shape[0]
    rec_joints = np.zeros((nticks, n))
    rec_com = np.zeros((nticks, 3))
    rec_head = np.zeros((nticks, 3))
    head_v_prev = qd[n : n + 3].copy()
    total_mass = float(np.sum(mass))
    gimbal = 0
    for t in range(nticks):
        tgt = targets[t]
        for s in range(n_sub):
            head_v_prev = qd[n : n + 3].copy()
            err = tgt - q[:n]
            pid_integ = np.clip(pid_integ + err * dt, -i_max, i_max)
            derr = (err - pid_prev) / dt
            pid_prev = err
            u = np.clip(kp * err + ki * pid_integ + kd * derr, -u_max, u_max)
            q, qd = _step_once(pack, ground, walls, q, qd, u, dt, gravity, cbody, coff)
            gimbal += _normalize_head(q, qd, n)
        if not (np.all(np.isfinite(q)) and np.all(np.isfinite(qd))):
            return (q, qd, pid_integ, pid_prev, rec_joints, rec_com, rec_head,
                    head_v_prev, gimbal, t + 1, False)
        _, _, pcm = kinematics(pack, q)
        rec_joints[t] = q[:n]
        rec_com[t] = (mass[:, None] * pcm).sum(axis=0) / total_mass
        rec_head[t] = q[n : n + 3]
    return (q, qd, pid_integ, pid_prev, rec_joints, rec_com, rec_head,
            head_v_prev, gimbal, nticks, True)


def cpg_rollout(phi, r, rdot, amp, omega, theta, delta, gain_a, mu, n_steps, dt):
    """Integrate the coupled-oscillator network n_steps times with constant
    inputs; returns the (n_steps, k) output trajectory and the final state.

    Dynamics: phi' = omega + A phi + B theta (A the chain-coupling matrix,
    B the end-injection matrix), r'' = a((a/4)(amp - r) - r'),
    x = r sin(phi) + delta.
    """
    phi = np.array(phi, dtype=float)
    r = np.array(r, dtype=float)
    rdot = np.array(rdot, dtype=float)
    k = phi.shape[0]
    out = np.empty((n_steps, k))
    r_traj = np.empty((n_steps, k))
    for s in range(n_steps):
        dphi = np.empty(k)
        dphi[0] = omega + mu[0] * (phi[1] - phi[0]) + theta
        if k > 2:
            dphi[1:-1] = omega + mu[1:-1] * (phi[:-2] - 2.0 * phi[1:-1] + phi[2:])
        dphi[-1] = omega + mu[-1] * (phi[-2] - phi[-1]) - theta
        rdd = gain_a * ((gain_a / 4.0) * (amp - r) - rdot)
        phi += dt * dphi
        rdot += dt * rdd
        r += dt * rdot
        out[s] = r * np.sin(phi) + delta
        r_traj[s] = r
    return out, r_traj, phi, r, rdot

"""Rotation and frame utilities shared by the kinematics and control layers."""

from __future__ import annotations

import numpy as np

TWO_PI = 2.0 * np.pi


def skew(v: np.ndarray) -> np.ndarray:
    """3x3 matrix S with S @ u == v x u."""
    x, y, z = v
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def rot_x(a: float) -> np.ndarray:
    c, s = np.cos(a), np.sin(a)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rot_y(a: float) -> np.ndarray:
    c, s = np.cos(a), np.sin(a)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rot_z(a: float) -> np.ndarray:
    c, s = np.cos(a), np.sin(a)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def euler_rotation(angles) -> np.ndarray:
    """World-from-body rotation for head Euler angles (qx, qy, qz).

    Composition order is Rz(qz) @ Ry(qy) @ Rx(qx).
    """
    qx, qy, qz = np.asarray(angles, dtype=float)
    return rot_z(qz) @ rot_y(qy) @ rot_x(qx)


def euler_rate_matrix(angles) -> np.ndarray:
    """E(angles) mapping Euler-angle rates (qx', qy', qz') to world angular velocity.

    Columns are the instantaneous world axes of the three elementary rotations:
    [Rz Ry x_hat, Rz y_hat, z_hat]. Singular at |qy| = pi/2 (guarded by the
    simulator's pitch clamp).
    """
    qx, qy, qz = np.asarray(angles, dtype=float)
    cb, sb = np.cos(qy), np.sin(qy)
    cc, sc = np.cos(qz), np.sin(qz)
    return np.array(
        [
            [cb * cc, -sc, 0.0],
            [cb * sc, cc, 0.0],
            [-sb, 0.0, 1.0],
        ]
    )


def euler_rate_bias(angles, rates) -> np.ndarray:
    """d/dt(E(angles)) @ rates: the head angular acceleration at zero coordinate
    acceleration. Derived from the time derivatives of E's columns."""
    qx, qy, qz = np.asarray(angles, dtype=float)
    da, db, dc = np.asarray(rates, dtype=float)
    cb, sb = np.cos(qy), np.sin(qy)
    cc, sc = np.cos(qz), np.sin(qz)
    ea = np.array([cb * cc, cb * sc, -sb])
    eb = np.array([-sc, cc, 0.0])
    ec = np.array([0.0, 0.0, 1.0])
    ea_dot = dc * np.cross(ec, ea) + db * np.cross(eb, ea)
    eb_dot = dc * np.cross(ec, eb)
    return da * ea_dot + db * eb_dot


def rodrigues(axis, angle: float) -> np.ndarray:
    """Rotation by `angle` about the unit vector `axis`."""
    u = np.asarray(axis, dtype=float)
    c, s = np.cos(angle), np.sin(angle)
    k = skew(u)
    return np.eye(3) + s * k + (1.0 - c) * (k @ k)


def axis_angle_from_matrix(r: np.ndarray, eps: float = 1e-9):
    """Extract (unit axis, angle in [0, pi]) from a rotation matrix.

    Zero rotation returns axis (1, 0, 0) by convention.
    """
    tr = np.trace(r)
    angle = float(np.arccos(np.clip((tr - 1.0) / 2.0, -1.0, 1.0)))
    if angle < eps:
        return np.array([1.0, 0.0, 0.0]), 0.0
    if np.pi - angle < 1e-6:
        # near pi the off-diagonal difference vanishes; use the symmetric part
        b = (r + np.eye(3)) / 2.0
        axis = np.sqrt(np.maximum(np.diag(b), 0.0))
        # fix signs from the largest component
        k = int(np.argmax(axis))
        if axis[k] > 0.0:
            for i in range(3):
                if i != k and b[k, i] < 0.0:
                    axis[i] = -axis[i]
        axis = axis / np.linalg.norm(axis)
        return axis, angle
    v = np.array([r[2, 1] - r[1, 2], r[0, 2] - r[2, 0], r[1, 0] - r[0, 1]])
    axis = v / (2.0 * np.sin(angle))
    n = np.linalg.norm(axis)
    return axis / n, angle


def wrap_angle(x):
    """Wrap to (-pi, pi]."""
    y = np.mod(np.asarray(x, dtype=float) + np.pi, TWO_PI) - np.pi
    return np.where(y == -np.pi, np.pi, y) if np.ndim(y) else (np.pi if y == -np.pi else float(y))

import numpy as np
import pytest

from slithernav.geometry import (
    axis_angle_from_matrix,
    euler_rate_bias,
    euler_rate_matrix,
    euler_rotation,
    rodrigues,
    wrap_angle,
)


def test_euler_rotation_identity():
    assert np.allclose(euler_rotation((0.0, 0.0, 0.0)), np.eye(3))


def test_euler_rotation_yaw_quarter_turn_maps_x_to_y():
    r = euler_rotation((0.0, 0.0, np.pi / 2))
    assert np.allclose(r @ np.array([1.0, 0.0, 0.0]), [0.0, 1.0, 0.0], atol=1e-12)


def test_euler_rotation_orthonormal():
    r = euler_rotation((0.3, -0.2, 1.1))
    assert np.abs(r.T @ r - np.eye(3)).max() < 1e-12
    assert abs(np.linalg.det(r) - 1.0) < 1e-12


def test_euler_rotation_matches_elementary_composition():
    rng = np.random.default_rng(7)
    for _ in range(20):
        a, b, c = rng.uniform(-np.pi, np.pi, 3)
        r = euler_rotation((a, b, c))
        rz = rodrigues([0, 0, 1], c)
        ry = rodrigues([0, 1, 0], b)
        rx = rodrigues([1, 0, 0], a)
        assert np.abs(r - rz @ ry @ rx).max() < 1e-12


def test_euler_rate_matrix_against_finite_difference_of_rotation():
    rng = np.random.default_rng(3)
    for _ in range(10):
        ang = rng.uniform(-1.2, 1.2, 3)
        rates = rng.uniform(-1.0, 1.0, 3)
        h = 1e-7
        rp = euler_rotation(ang + h * rates)
        rm = euler_rotation(ang - h * rates)
        rdot = (rp - rm) / (2 * h)
        omega_hat = rdot @ euler_rotation(ang).T
        omega_fd = np.array([omega_hat[2, 1], omega_hat[0, 2], omega_hat[1, 0]])
        assert np.allclose(euler_rate_matrix(ang) @ rates, omega_fd, atol=1e-6)


def test_euler_rate_bias_against_finite_difference_of_omega():
    rng = np.random.default_rng(4)
    for _ in range(10):
        ang = rng.uniform(-1.2, 1.2, 3)
        rates = rng.uniform(-1.0, 1.0, 3)
        h = 1e-6
        wp = euler_rate_matrix(ang + h * rates) @ rates
        wm = euler_rate_matrix(ang - h * rates) @ rates
        assert np.allclose(euler_rate_bias(ang, rates), (wp - wm) / (2 * h), atol=1e-6)


def test_axis_angle_round_trip():
    rng = np.random.default_rng(5)
    for _ in range(50):
        axis = rng.normal(size=3)
        axis /= np.linalg.norm(axis)
        angle = rng.uniform(1e-6, np.pi - 1e-6)
        got_axis, got_angle = axis_angle_from_matrix(rodrigues(axis, angle))
        assert abs(got_angle - angle) < 1e-9
        assert np.allclose(got_axis, axis, atol=1e-7)


def test_axis_angle_zero_rotation_uses_x_axis_convention():
    axis, angle = axis_angle_from_matrix(np.eye(3))
    assert angle == 0.0
    assert np.allclose(axis, [1.0, 0.0, 0.0])


def test_axis_angle_near_pi():
    axis = np.array([0.6, -0.64, 0.48])
    axis /= np.linalg.norm(axis)
    got_axis, got_angle = axis_angle_from_matrix(rodrigues(axis, np.pi - 1e-9))
    assert abs(got_angle - (np.pi - 1e-9)) < 1e-6
    assert min(np.linalg.norm(got_axis - axis), np.linalg.norm(got_axis + axis)) < 1e-4


@pytest.mark.parametrize(
    "x,expected",
    [(0.0, 0.0), (np.pi, np.pi), (-np.pi, np.pi), (3 * np.pi / 2, -np.pi / 2), (-5 * np.pi, np.pi)],
)
def test_wrap_angle(x, expected):
    assert abs(wrap_angle(x) - expected) < 1e-12

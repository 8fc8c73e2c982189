"""Attitude kinematics and small 3-vector helpers.

Angles are radians everywhere.  The rotation convention is Z-Y-X (yaw psi,
then pitch theta, then roll phi), mapping body-frame vectors to the
inertial frame.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .errors import GimbalLock

# |theta| must stay below pi/2 - GIMBAL_MARGIN for the Euler-rate transform.
GIMBAL_MARGIN = 1e-6


class Vec3(NamedTuple):
    x: float
    y: float
    z: float


class EulerAngles(NamedTuple):
    phi: float
    theta: float
    psi: float


ZERO3 = Vec3(0.0, 0.0, 0.0)


def rotation_body_to_inertial(angles) -> np.ndarray:
    """Z-Y-X rotation matrix taking body-frame vectors to the inertial frame.

    Entry (1, 1) uses ``s_phi s_theta s_psi + c_phi c_psi`` so that the
    matrix is a proper rotation (R(0, 0, 0) is the identity).
    """
    return np.array(rotation_rows(*angles))


def rotation_rows(phi: float, theta: float, psi: float):
    """Same matrix as nested tuples; used by the scalar hot loops."""
    sf, cf = math.sin(phi), math.cos(phi)
    st, ct = math.sin(theta), math.cos(theta)
    sp, cp = math.sin(psi), math.cos(psi)
    return (
        (ct * cp, sf * st * cp - cf * sp, cf * st * cp + sf * sp),
        (ct * sp, sf * st * sp + cf * cp, cf * st * sp - sf * cp),
        (-st, sf * ct, cf * ct),
    )


def cross(a, b) -> Vec3:
    return Vec3(
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    )


def _check_gimbal(theta: float) -> None:
    if not abs(theta) < math.pi / 2 - GIMBAL_MARGIN:
        raise GimbalLock(f"|theta|={abs(theta):.12g} too close to pi/2")


def euler_rate_matrix(angles) -> np.ndarray:
    """Matrix W with (phi_dot, theta_dot, psi_dot) = W @ omega_body."""
    phi, theta, _ = angles
    _check_gimbal(theta)
    sf, cf = math.sin(phi), math.cos(phi)
    tt, ct = math.tan(theta), math.cos(theta)
    return np.array(
        [
            [1.0, sf * tt, cf * tt],
            [0.0, cf, -sf],
            [0.0, sf / ct, cf / ct],
        ]
    )


def euler_rates_from_body_omega(angles, omega) -> Vec3:
    """Map body angular velocity to Euler-angle rates.

    Raises:
        GimbalLock: if |theta| >= pi/2 - 1e-6.
    """
    phi, theta, _ = angles
    _check_gimbal(theta)
    wx, wy, wz = omega
    sf, cf = math.sin(phi), math.cos(phi)
    ct = math.cos(theta)
    tt = math.tan(theta)
    return Vec3(
        wx + (sf * wy + cf * wz) * tt,
        cf * wy - sf * wz,
        (sf * wy + cf * wz) / ct,
    )


def body_omega_from_euler_rates(angles, rates) -> Vec3:
    """Inverse of :func:`euler_rates_from_body_omega` (defined everywhere)."""
    phi, theta, _ = angles
    dphi, dtheta, dpsi = rates
    sf, cf = math.sin(phi), math.cos(phi)
    st, ct = math.sin(theta), math.cos(theta)
    return Vec3(
        dphi - st * dpsi,
        cf * dtheta + sf * ct * dpsi,
        -sf * dtheta + cf * ct * dpsi,
    )


def wrap_angle(a: float) -> float:
    """Wrap to [-pi, pi)."""
    return (a + math.pi) % (2.0 * math.pi) - math.pi

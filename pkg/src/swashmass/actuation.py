"""Actuator models: rotor allocation, swash-mass servo, stroke saturation."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

from .errors import InfeasibleAllocation
from .vehicle import DesignParams


class RotorSpeeds(NamedTuple):
    """Upper and lower rotor speeds [rad/s]."""

    omega1: float
    omega2: float


def allocate_rotors(params: DesignParams, T1: float, M_psi: float) -> RotorSpeeds:
    """Invert T1 = g1 (W1^2 + W2^2), M_psi = g2 (W1^2 - W2^2).

    Raises:
        InfeasibleAllocation: if the yaw demand needs a negative squared speed.
    """
    if T1 < 0:
        raise InfeasibleAllocation(f"thrust must be non-negative, got {T1}")
    a = T1 / params.gamma1
    b = M_psi / params.gamma2
    w1_sq = 0.5 * (a + b)
    w2_sq = 0.5 * (a - b)
    if w1_sq < 0 or w2_sq < 0:
        raise InfeasibleAllocation(
            f"T1={T1} cannot support M_psi={M_psi} (W1^2={w1_sq:.3g}, W2^2={w2_sq:.3g})"
        )
    return RotorSpeeds(math.sqrt(w1_sq), math.sqrt(w2_sq))


def rotor_forces(params: DesignParams, speeds: RotorSpeeds) -> tuple:
    """Forward map from rotor speeds to (T1, M_psi)."""
    s1 = speeds.omega1 ** 2
    s2 = speeds.omega2 ** 2
    return params.gamma1 * (s1 + s2), params.gamma2 * (s1 - s2)


def saturate_ell(ell_cmd: float, L: float) -> float:
    """Clamp a swash command to the stroke [-L, L]."""
    if ell_cmd > L:
        return L
    if ell_cmd < -L:
        return -L
    return ell_cmd


@dataclass(frozen=True)
class ServoState:
    """Second-order position servo driving one swash pair.

    Attributes:
        ell: Position [m].
        ell_dot: Velocity [m/s].
        ell_ddot: Acceleration at the current command [m/s^2].
        natural_frequency: omega_n [rad/s].
        damping: zeta [-].
        L: Hard stop [m].
    """

    ell: float = 0.0
    ell_dot: float = 0.0
    ell_ddot: float = 0.0
    natural_frequency: float = 200.0
    damping: float = 1.0
    L: float = 0.2

    def __post_init__(self):
        if self.natural_frequency <= 0 or self.damping <= 0:
            raise ValueError("servo natural_frequency and damping must be positive")


def _servo_accel(wn, zeta, cmd, ell, ell_dot):
    return wn * wn * (cmd - ell) - 2.0 * zeta * wn * ell_dot


def servo_step(servo: ServoState, command: float, dt: float) -> ServoState:
    """Advance the servo one RK4 step towards ``command`` held over ``dt``.

    The position is clamped to [-L, L]; hitting a stop zeroes the velocity.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    wn, z = servo.natural_frequency, servo.damping
    x, v = servo.ell, servo.ell_dot

    a1 = _servo_accel(wn, z, command, x, v)
    x2, v2 = x + 0.5 * dt * v, v + 0.5 * dt * a1
    a2 = _servo_accel(wn, z, command, x2, v2)
    x3, v3 = x + 0.5 * dt * v2, v + 0.5 * dt * a2
    a3 = _servo_accel(wn, z, command, x3, v3)
    x4, v4 = x + dt * v3, v + dt * a3
    a4 = _servo_accel(wn, z, command, x4, v4)
    x_new = x + dt / 6.0 * (v + 2.0 * v2 + 2.0 * v3 + v4)
    v_new = v + dt / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4)

    L = servo.L
    if x_new >= L:
        x_new, v_new = L, 0.0
    elif x_new <= -L:
        x_new, v_new = -L, 0.0
    a_new = _servo_accel(wn, z, command, x_new, v_new)
    if (x_new == L and a_new > 0) or (x_new == -L and a_new < 0):
        a_new = 0.0
    return ServoState(x_new, v_new, a_new, wn, z, L)


def ideal_servo(command: float, L: float) -> ServoState:
    """Servo bypass: position equals the (saturated) command, no motion."""
    return ServoState(saturate_ell(command, L), 0.0, 0.0, L=L)

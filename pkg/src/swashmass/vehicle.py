"""Swash-mass vehicle plant.

The vehicle is a coaxial rotor body with two pairs of sliding masses on
the body plane.  Moving a pair by ``ell`` shifts the centre of mass by
``-beta * ell`` in the body frame, which tilts the thrust line.

Three equations of motion are provided:

* :func:`derivatives_3d` - full rigid body with time-varying inertia.
* :func:`derivatives_2d_full` - exact planar (y, z, phi) restriction.
* :func:`derivatives_2d_simplified` - the constant-inertia model the
  controller is designed on.

2D sign convention: the planar pitch ``phi`` tilts thrust towards +y, so
``y_ddot`` grows with ``sin(phi)``.  In the 3D frame this corresponds to a
roll of ``-phi`` about body x (``omega_x = -phi_dot``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .core_math import (
    EulerAngles,
    Vec3,
    _check_gimbal,
    cross,
    rotation_rows,
)
from .errors import OutOfRange, SingularInertia

# det(I) must exceed this fraction of max(diag(I))**3.
SINGULAR_REL_TOL = 1e-9
# Tolerance on |ell| <= L to absorb float noise from integration.
_RANGE_SLACK = 1e-12


@dataclass(frozen=True)
class DesignParams:
    """Vehicle constants.

    Attributes:
        M: Total mass [kg].
        m: Mass of one swash mass [kg].
        L: Arm length and maximum swash displacement [m].
        g: Gravity [m/s^2].
        gamma1: Thrust coefficient, T1 = gamma1 * (W1^2 + W2^2) [N s^2].
        gamma2: Yaw coefficient, M_psi = gamma2 * (W1^2 - W2^2) [N m s^2].
        m_b: Body mass [kg]; defaults to M - 4m.
    """

    M: float = 1.1
    m: float = 0.1
    L: float = 0.2
    g: float = 9.81
    gamma1: float = 1e-5
    gamma2: float = 1e-5
    m_b: float | None = None

    def __post_init__(self):
        if self.m_b is None:
            object.__setattr__(self, "m_b", self.M - 4.0 * self.m)
        for name in ("M", "m", "L", "g", "gamma1", "gamma2"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be positive and finite, got {value}")
        if abs(self.M - (self.m_b + 4.0 * self.m)) > 1e-12:
            raise ValueError("M must equal m_b + 4 m")
        if not 0.0 < self.beta < 0.25:
            raise ValueError(f"beta = m/M must lie in (0, 0.25), got {self.beta}")

    @property
    def beta(self) -> float:
        """Swash mass to total mass ratio m/M."""
        return self.m / self.M

    @property
    def hover_thrust(self) -> float:
        return self.M * self.g

    @classmethod
    def from_beta(cls, beta: float, L: float, M: float = 1.1, **kw) -> "DesignParams":
        """Build parameters with a given mass ratio at fixed total mass."""
        return cls(M=M, m=beta * M, L=L, **kw)


@dataclass(frozen=True)
class VehicleState:
    """Full 3D state.

    Attributes:
        pos: Geometric centre in the inertial frame [m].
        vel: Its velocity [m/s].
        angles: (phi, theta, psi) Z-Y-X Euler angles [rad].
        omega: Body angular velocity [rad/s].
        ell: Swash displacements (ell_x, ell_y) [m].
        ell_dot: Their rates [m/s].
        ell_ddot: Their accelerations [m/s^2].
    """

    pos: Vec3 = Vec3(0.0, 0.0, 0.0)
    vel: Vec3 = Vec3(0.0, 0.0, 0.0)
    angles: EulerAngles = EulerAngles(0.0, 0.0, 0.0)
    omega: Vec3 = Vec3(0.0, 0.0, 0.0)
    ell: tuple = (0.0, 0.0)
    ell_dot: tuple = (0.0, 0.0)
    ell_ddot: tuple = (0.0, 0.0)

    def rigid_vector(self) -> tuple:
        """The 12 integrated coordinates (pos, vel, angles, omega)."""
        return (*self.pos, *self.vel, *self.angles, *self.omega)

    @classmethod
    def from_rigid_vector(cls, x, ell=(0.0, 0.0), ell_dot=(0.0, 0.0), ell_ddot=(0.0, 0.0)):
        return cls(
            Vec3(*x[0:3]),
            Vec3(*x[3:6]),
            EulerAngles(*x[6:9]),
            Vec3(*x[9:12]),
            tuple(ell),
            tuple(ell_dot),
            tuple(ell_ddot),
        )


class State2D(NamedTuple):
    """Planar state x1..x6 = (y, y_dot, z, z_dot, phi, phi_dot)."""

    y: float = 0.0
    vy: float = 0.0
    z: float = 0.0
    vz: float = 0.0
    phi: float = 0.0
    phi_dot: float = 0.0


class SwashMotion(NamedTuple):
    """Swash displacement with its first two derivatives along one axis."""

    ell: float = 0.0
    ell_dot: float = 0.0
    ell_ddot: float = 0.0


@dataclass(frozen=True)
class ControlInputs:
    """The four physical inputs: thrust, two swash commands, yaw moment."""

    T1: float
    ell_x_cmd: float = 0.0
    ell_y_cmd: float = 0.0
    M_psi: float = 0.0


class StateDerivative(NamedTuple):
    """Time derivative of the 12 rigid-body coordinates."""

    vel: Vec3
    acc: Vec3
    angle_rates: Vec3
    omega_dot: Vec3

    def as_tuple(self) -> tuple:
        return (*self.vel, *self.acc, *self.angle_rates, *self.omega_dot)


@dataclass(frozen=True)
class InertiaSnapshot:
    I: np.ndarray = field(repr=False)
    I_dot: np.ndarray = field(repr=False)


def _check_range(params: DesignParams, *ells: float) -> None:
    for e in ells:
        if not abs(e) <= params.L + _RANGE_SLACK:
            raise OutOfRange(f"|ell|={abs(e):.6g} exceeds L={params.L}")


def r_delta_body(params: DesignParams, ell_x: float, ell_y: float) -> Vec3:
    """Body-frame vector from the centre of mass to the geometric centre."""
    _check_range(params, ell_x, ell_y)
    b = params.beta
    return Vec3(-b * ell_x, -b * ell_y, 0.0)


def _axis_inertia(params: DesignParams, ell: float) -> float:
    # Inertia contribution of one displaced pair plus the shifted body.
    a = 0.5 - 2.0 * params.beta
    h = 0.5 * params.L
    return (
        params.m_b * (2.0 * params.beta * ell) ** 2
        + params.m * (a * ell + h) ** 2
        + params.m * (a * ell - h) ** 2
    )


def _axis_inertia_rate(params: DesignParams, ell: float, ell_dot: float) -> float:
    b = params.beta
    coef = params.m - 8.0 * b * params.m + 16.0 * b * b * params.m + 8.0 * b * b * params.m_b
    return coef * ell * ell_dot


def _product_xy(params: DesignParams, ell_x, ell_y, cphi, ctheta) -> float:
    a = 0.5 - 2.0 * params.beta
    h = 0.5 * params.L
    m, mb, b = params.m, params.m_b, params.beta
    return (
        -mb * (-2.0 * b * ell_y * cphi) * (-2.0 * b * ell_x * ctheta)
        - m * (a * ell_x + h) * ctheta * (a * ell_y + h) * cphi
        - m * (a * ell_x - h) * ctheta * (a * ell_y - h) * cphi
    )


def inertia_elements(params, ell_x, ell_y, phi, theta, diagonal=False):
    """(Ixx, Iyy, Izz, Ixy) as floats; see :func:`inertia`."""
    ixx = _axis_inertia(params, ell_y)
    iyy = _axis_inertia(params, ell_x)
    izz = ixx + iyy
    ixy = 0.0 if diagonal else _product_xy(params, ell_x, ell_y, math.cos(phi), math.cos(theta))
    return ixx, iyy, izz, ixy


def inertia(
    params: DesignParams,
    ell_x: float,
    ell_y: float,
    angles=EulerAngles(0.0, 0.0, 0.0),
    diagonal: bool = False,
) -> np.ndarray:
    """Inertia matrix about the centre of mass.

    The product term I_xy carries the attitude cosines exactly as in the
    published model.  ``diagonal=True`` drops it.

    Raises:
        OutOfRange: if a displacement exceeds L.
    """
    _check_range(params, ell_x, ell_y)
    ixx, iyy, izz, ixy = inertia_elements(params, ell_x, ell_y, angles[0], angles[1], diagonal)
    return np.array([[ixx, ixy, 0.0], [ixy, iyy, 0.0], [0.0, 0.0, izz]])


def _inertia_rate_elements(params, ell, ell_dot, phi, theta, phi_dot, theta_dot, diagonal):
    ell_x, ell_y = ell
    dx, dy = ell_dot
    dixx = _axis_inertia_rate(params, ell_y, dy)
    diyy = _axis_inertia_rate(params, ell_x, dx)
    dizz = dixx + diyy
    if diagonal:
        return dixx, diyy, dizz, 0.0
    a = 0.5 - 2.0 * params.beta
    h = 0.5 * params.L
    m, mb, b = params.m, params.m_b, params.beta
    sf, cf = math.sin(phi), math.cos(phi)
    cth, sth = math.cos(theta), math.sin(theta)
    # I_xy = -cos(phi) cos(theta) P(ell_x, ell_y)
    p = 4.0 * mb * b * b * ell_x * ell_y + m * (a * ell_x + h) * (a * ell_y + h) + m * (a * ell_x - h) * (a * ell_y - h)
    dp = (
        4.0 * mb * b * b * (dx * ell_y + ell_x * dy)
        + m * a * (dx * (a * ell_y + h) + (a * ell_x + h) * dy)
        + m * a * (dx * (a * ell_y - h) + (a * ell_x - h) * dy)
    )
    dcc = -sf * phi_dot * cth - cf * sth * theta_dot
    return dixx, diyy, dizz, -(dcc * p + cf * cth * dp)


def inertia_dot(params: DesignParams, state: VehicleState, diagonal: bool = False) -> np.ndarray:
    """Analytic time derivative of :func:`inertia` along ``state``.

    Euler-angle rates needed by the attitude-dependent product term come
    from the body rates through the standard kinematic transform.
    """
    phi, theta, _ = state.angles
    if diagonal:
        phi_dot = theta_dot = 0.0
    else:
        _check_gimbal(theta)
        wx, wy, wz = state.omega
        sf, cf = math.sin(phi), math.cos(phi)
        phi_dot = wx + (sf * wy + cf * wz) * math.tan(theta)
        theta_dot = cf * wy - sf * wz
    d = _inertia_rate_elements(
        params, state.ell, state.ell_dot, phi, theta, phi_dot, theta_dot, diagonal
    )
    return np.array([[d[0], d[3], 0.0], [d[3], d[1], 0.0], [0.0, 0.0, d[2]]])


def inertia_snapshot(params, state: VehicleState, diagonal=False) -> InertiaSnapshot:
    return InertiaSnapshot(
        inertia(params, *state.ell, state.angles, diagonal),
        inertia_dot(params, state, diagonal),
    )


def constant_inertia(params: DesignParams) -> float:
    """Pitch-axis inertia at the mean swash position (ell = 0): 2 m (L/2)^2."""
    return _axis_inertia(params, 0.0)


def moment_about_cm(params: DesignParams, angles, ell, T1: float, M_psi: float = 0.0) -> Vec3:
    """Inertial-frame moment of thrust and yaw torque about the centre of mass.

    The thrust acts at the geometric centre, offset by ``r_delta_body`` from
    the centre of mass; its lever arm produces the tilting moment.
    """
    r = r_delta_body(params, ell[0], ell[1])
    body = cross(r, (0.0, 0.0, T1))
    body = (body[0], body[1], body[2] + M_psi)
    R = rotation_rows(*angles)
    return Vec3(*(row[0] * body[0] + row[1] * body[1] + row[2] * body[2] for row in R))


def _solve_sym3(ixx, iyy, izz, ixy, rhs):
    """Solve the block-diagonal symmetric system I w = rhs."""
    det2 = ixx * iyy - ixy * ixy
    return (
        (iyy * rhs[0] - ixy * rhs[1]) / det2,
        (ixx * rhs[1] - ixy * rhs[0]) / det2,
        rhs[2] / izz,
    )


def rigid_body_rates(params, x, ell, ell_dot, ell_ddot, T1, M_psi, diagonal=True):
    """Scalar core of :func:`derivatives_3d` acting on the 12-vector ``x``.

    Rotational dynamics are solved first (in body axes), then the angular
    acceleration is substituted into the centre-of-mass shift terms of the
    translational equation.

    Raises:
        SingularInertia: if det(I) is below the relative threshold.
        GimbalLock: if |theta| is too close to pi/2.
    """
    phi, theta, psi = x[6], x[7], x[8]
    wx, wy, wz = x[9], x[10], x[11]
    b = params.beta
    lx, ly = ell
    dlx, dly = ell_dot
    ddlx, ddly = ell_ddot

    _check_gimbal(theta)
    sf, cf = math.sin(phi), math.cos(phi)
    st, ct = math.sin(theta), math.cos(theta)
    tt = st / ct
    phi_dot = wx + (sf * wy + cf * wz) * tt
    theta_dot = cf * wy - sf * wz
    psi_dot = (sf * wy + cf * wz) / ct

    ixx, iyy, izz, ixy = inertia_elements(params, lx, ly, phi, theta, diagonal)
    det = (ixx * iyy - ixy * ixy) * izz
    scale = max(ixx, iyy, izz)
    if not det > SINGULAR_REL_TOL * scale ** 3:
        raise SingularInertia(f"det(I)={det:.3e} below threshold")
    dixx, diyy, dizz, dixy = _inertia_rate_elements(
        params, ell, ell_dot, phi, theta, phi_dot, theta_dot, diagonal
    )

    # body-frame moment: r_delta x (0, 0, T1) + (0, 0, M_psi)
    rx, ry = -b * lx, -b * ly
    tau = (ry * T1, -rx * T1, M_psi)
    hdot = (
        dixx * wx + dixy * wy,
        dixy * wx + diyy * wy,
        dizz * wz,
    )
    rhs = (tau[0] - hdot[0], tau[1] - hdot[1], tau[2] - hdot[2])
    dwx, dwy, dwz = _solve_sym3(ixx, iyy, izz, ixy, rhs)

    # centre-of-mass shift acceleration in body axes
    vrx, vry = -b * dlx, -b * dly
    arx, ary = -b * ddlx, -b * ddly
    # 2 w x v_r  (v_r has no z component)
    c1 = (2.0 * (-wz * vry), 2.0 * (wz * vrx), 2.0 * (wx * vry - wy * vrx))
    # wdot x r
    c2 = (-dwz * ry, dwz * rx, dwx * ry - dwy * rx)
    # w x (w x r)
    wr = (-wz * ry, wz * rx, wx * ry - wy * rx)
    c3 = (wy * wr[2] - wz * wr[1], wz * wr[0] - wx * wr[2], wx * wr[1] - wy * wr[0])
    bx = arx + c1[0] + c2[0] + c3[0]
    by = ary + c1[1] + c2[1] + c3[1]
    bz = c1[2] + c2[2] + c3[2] + T1 / params.M

    R = rotation_rows(phi, theta, psi)
    ax = R[0][0] * bx + R[0][1] * by + R[0][2] * bz
    ay = R[1][0] * bx + R[1][1] * by + R[1][2] * bz
    az = R[2][0] * bx + R[2][1] * by + R[2][2] * bz - params.g

    return (
        x[3], x[4], x[5],
        ax, ay, az,
        phi_dot, theta_dot, psi_dot,
        dwx, dwy, dwz,
    )


def derivatives_3d(
    params: DesignParams, state: VehicleState, u: ControlInputs, diagonal_inertia: bool = True
) -> StateDerivative:
    """Full rigid-body derivative.

    The swash displacement acting on the body is ``state.ell`` (the servo
    output); the command fields of ``u`` are ignored here, only ``T1`` and
    ``M_psi`` are used.
    """
    _check_range(params, *state.ell)
    d = rigid_body_rates(
        params,
        state.rigid_vector(),
        state.ell,
        state.ell_dot,
        state.ell_ddot,
        u.T1,
        u.M_psi,
        diagonal_inertia,
    )
    return StateDerivative(Vec3(*d[0:3]), Vec3(*d[3:6]), Vec3(*d[6:9]), Vec3(*d[9:12]))


def shift_terms(phi, phi_dot, phi_ddot, ell, ell_dot, ell_ddot):
    """Centre-of-mass shift accelerations (f1, f2) of the planar model."""
    s, c = math.sin(phi), math.cos(phi)
    f1 = 2.0 * phi_dot * ell_dot * s - ell_ddot * c + ell * phi_ddot * s + ell * phi_dot * phi_dot * c
    f2 = -ell_ddot * s + ell * phi_dot * phi_dot * s - 2.0 * phi_dot * ell_dot * c - ell * phi_ddot * c
    return f1, f2


def derivatives_2d_full(params: DesignParams, state, T1: float, swash=SwashMotion()) -> tuple:
    """Planar model with the full time-varying pitch inertia.

    Returns (y_dot, y_ddot, z_dot, z_ddot, phi_dot, phi_ddot).  This is the
    exact restriction of :func:`derivatives_3d` to the y-z plane:

        Ixx(ell) phi_ddot + Ixx_dot phi_dot = beta T1 ell
        y_ddot = beta f1 + T1 sin(phi) / M
        z_ddot = -beta f2 + T1 cos(phi) / M - g
    """
    y, vy, z, vz, phi, w = state
    ell, ell_dot, ell_ddot = swash
    _check_range(params, ell)
    b = params.beta
    ixx = _axis_inertia(params, ell)
    if not ixx > 0.0:
        raise SingularInertia("pitch inertia is not positive")
    wd = (b * T1 * ell - _axis_inertia_rate(params, ell, ell_dot) * w) / ixx
    f1, f2 = shift_terms(phi, w, wd, ell, ell_dot, ell_ddot)
    ay = b * f1 + T1 * math.sin(phi) / params.M
    az = -b * f2 + T1 * math.cos(phi) / params.M - params.g
    return (vy, ay, vz, az, w, wd)


def derivatives_2d_simplified(
    params: DesignParams, I_c: float, state, T1: float, swash=SwashMotion()
) -> tuple:
    """Constant-inertia planar model used for controller design.

        M y_ddot   = beta f1 + T1 sin(phi)
        M z_ddot   = beta f2 - M g + T1 cos(phi)
        I_c phi_ddot = beta T1 cos(phi) ell
    """
    if not I_c > 0:
        raise ValueError("I_c must be positive")
    y, vy, z, vz, phi, w = state
    ell, ell_dot, ell_ddot = swash
    _check_range(params, ell)
    b = params.beta
    c = math.cos(phi)
    wd = b * T1 * c * ell / I_c
    f1, f2 = shift_terms(phi, w, wd, ell, ell_dot, ell_ddot)
    ay = (b * f1 + T1 * math.sin(phi)) / params.M
    az = (b * f2 + T1 * c) / params.M - params.g
    return (vy, ay, vz, az, w, wd)


@dataclass(frozen=True)
class MotionLimits:
    """Bounds on swash and pitch motion used to size the robust offsets."""

    ell_max: float = 0.0
    ell_dot_max: float = 0.0
    ell_ddot_max: float = 0.0
    phi_dot_max: float = 0.0
    phi_ddot_max: float = 0.0

    def __post_init__(self):
        for k, v in self.__dict__.items():
            if v < 0:
                raise ValueError(f"{k} must be non-negative")


def theta_bounds(params: DesignParams, limits: MotionLimits) -> tuple:
    """Upper bounds (Theta1, Theta2) on |f1|, |f2| over the limit box."""
    lim = limits
    first = math.sqrt(lim.ell_ddot_max ** 2 + 4.0 * lim.phi_dot_max ** 2 * lim.ell_dot_max ** 2)
    second = math.sqrt(
        lim.ell_max ** 2 * lim.phi_dot_max ** 4 + lim.ell_max ** 2 * lim.phi_ddot_max ** 2
    )
    theta = first + second
    return theta, theta

"""Back-stepping controller for the swash-mass vehicle.

Planar (2D) stack, outer to inner:

1. Altitude: thrust ``T1`` from the z tracking error.
2. Lateral: virtual input ``u_y = sin(phi*)`` from the y tracking error.
3. Pitch: swash command ``ell_y`` from the pitch error, with stroke
   saturation and an auxiliary anti-windup error ``e_star``.

Every loop uses the same pattern.  With position error ``ea`` and
``eb = ref_rate + ka ea - rate`` the law makes the closed-loop Lyapunov
derivative ``-ka ea^2 - kb eb^2``.

The 3D stack adds an x loop, a roll loop through ``ell_x``, a yaw loop
through ``M_psi`` and an attitude-dependent decoupling matrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace
from typing import NamedTuple

import numpy as np

from .actuation import saturate_ell
from .core_math import euler_rates_from_body_omega, wrap_angle
from .errors import NearSingularAttitude, ZeroThrust
from .trajectories import ReferenceSample
from .vehicle import ControlInputs, DesignParams, VehicleState, constant_inertia


@dataclass(frozen=True)
class GainSet:
    """Controller gains.

    k1, k2 pitch; k3, k4 altitude; k5, k6 lateral y; k7, k8 lateral x;
    k9, k10 roll; k_psi1, k_psi2 yaw.  Missing 3D gains fall back to their
    planar counterparts (k7=k5, k8=k6, k9=k1, k10=k2, k_psi1=k1, k_psi2=k2).
    ``theta1``/``theta2`` are the robust offsets on the shift accelerations
    [m/s^2].
    """

    k1: float
    k2: float
    k3: float
    k4: float
    k5: float
    k6: float
    epsilon1: float
    k7: float | None = None
    k8: float | None = None
    k9: float | None = None
    k10: float | None = None
    k_psi1: float | None = None
    k_psi2: float | None = None
    theta1: float = 0.0
    theta2: float = 0.0

    def __post_init__(self):
        fallback = {
            "k7": self.k5,
            "k8": self.k6,
            "k9": self.k1,
            "k10": self.k2,
            "k_psi1": self.k1,
            "k_psi2": self.k2,
        }
        for name, value in fallback.items():
            if getattr(self, name) is None:
                object.__setattr__(self, name, value)
        for f in fields(self):
            v = getattr(self, f.name)
            if f.name.startswith("theta"):
                if not (math.isfinite(v) and v >= 0):
                    raise ValueError(f"{f.name} must be >= 0, got {v}")
            elif not (math.isfinite(v) and v > 0):
                raise ValueError(f"{f.name} must be > 0, got {v}")


PRESETS = {
    "linear": GainSet(k1=0.2, k2=3.0, k3=0.2, k4=2.0, k5=0.2, k6=2.0, epsilon1=0.1),
    "complex": GainSet(k1=5.0, k2=0.5, k3=1.0, k4=2.0, k5=1.6, k6=8.0, epsilon1=0.2),
}


def gain_preset(name: str) -> GainSet:
    try:
        return PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown gain preset {name!r}; choose from {sorted(PRESETS)}") from None


@dataclass(frozen=True)
class ControlOptions:
    """Implementation settings the control laws leave open.

    Attributes:
        Ts: Controller period [s]; also the compensator Euler step.
        filter_tau: Time constant of the desired-angle differentiator [s].
            The default equals 10 Ts at the nominal Ts = 1e-4 and stays
            fixed when Ts changes, so refining the step does not retune
            the controller; None means 10 Ts.
        eps_div: Smallest |cos| accepted in a denominator.
        angle_limit: Absolute clamp on desired tilt angles [rad].
        thrust_max_factor: T1 is clamped to [0, factor * M g].
        compensator: Enable the anti-windup auxiliary error.
        yaw_guidance: Point the heading at the target (else hold psi_ref).
        psi_ref: Desired yaw when guidance is off [rad].
        yaw_hold_radius: Below this planar distance psi* is held [m].
        roll_loop: 3D only; False pins theta* to 0.
        tilt_heading: 3D only; yaw used to turn (u_x, u_y) into tilt
            targets, ``desired`` (psi*) or ``measured`` (current psi).
        I_c, I_cy, I_cz: Constant inertias for the pitch, roll, yaw laws;
            None uses the vehicle values at ell = 0.
    """

    Ts: float = 1e-4
    filter_tau: float | None = 1e-3
    eps_div: float = 1e-3
    angle_limit: float = math.radians(80.0)
    thrust_max_factor: float = 4.0
    compensator: bool = True
    yaw_guidance: bool = True
    psi_ref: float = 0.0
    yaw_hold_radius: float = 1e-3
    roll_loop: bool = True
    tilt_heading: str = "desired"
    I_c: float | None = None
    I_cy: float | None = None
    I_cz: float | None = None

    def __post_init__(self):
        if self.tilt_heading not in ("desired", "measured"):
            raise ValueError(f"tilt_heading must be 'desired' or 'measured', got {self.tilt_heading!r}")
        if not self.Ts > 0:
            raise ValueError("Ts must be positive")
        if self.filter_tau is not None and not self.filter_tau > 0:
            raise ValueError("filter_tau must be positive")

    @property
    def filter_gain(self) -> float:
        tau = 10.0 * self.Ts if self.filter_tau is None else self.filter_tau
        return self.Ts / (tau + self.Ts)

    def inertias(self, params: DesignParams) -> tuple:
        ic = constant_inertia(params)
        return (
            ic if self.I_c is None else self.I_c,
            ic if self.I_cy is None else self.I_cy,
            2.0 * ic if self.I_cz is None else self.I_cz,
        )


@dataclass(frozen=True)
class ControllerState:
    """Memory carried between controller steps.

    ``e_star``/``e_star_dot`` belong to the ell_y (pitch) axis and
    ``e_star_x``/``e_star_x_dot`` to the ell_x (roll) axis.  ``prev_*`` and
    ``*_rate`` are the desired-angle differentiator memories.
    """

    e_star: float = 0.0
    e_star_dot: float = 0.0
    e_star_x: float = 0.0
    e_star_x_dot: float = 0.0
    prev_phi_star: float = 0.0
    phi_star_rate: float = 0.0
    prev_theta_star: float = 0.0
    theta_star_rate: float = 0.0
    prev_psi_star: float = 0.0
    psi_star_rate: float = 0.0

    @classmethod
    def reset(cls) -> "ControllerState":
        return cls()


@dataclass(frozen=True)
class TrackingErrors:
    """Tracking errors of one controller step (unused loops stay 0).

    e1, e2 lateral y; e3, e4 altitude; e5, e6 pitch; e7, e8 lateral x;
    e9, e10 roll; e_psi, e_psi_dot yaw.  ``e_bar5``/``e_bar6`` are the
    compensated pitch errors.
    """

    e1: float = 0.0
    e2: float = 0.0
    e3: float = 0.0
    e4: float = 0.0
    e5: float = 0.0
    e6: float = 0.0
    e7: float = 0.0
    e8: float = 0.0
    e9: float = 0.0
    e10: float = 0.0
    e_psi: float = 0.0
    e_psi_dot: float = 0.0
    e_star: float = 0.0
    e_star_dot: float = 0.0
    e_bar5: float = 0.0
    e_bar6: float = 0.0


def _clamp(v, lo, hi):
    return lo if v < lo else hi if v > hi else v


def _backstep(ka, kb, ea, eb):
    # common bracket ea + ka eb - ka^2 ea + kb eb
    return ea + ka * eb - ka * ka * ea + kb * eb


def _loop_errors(ka, ref_pos, ref_vel, pos, vel):
    ea = ref_pos - pos
    return ea, ref_vel + ka * ea - vel


def thrust_law_2d(
    gains: GainSet,
    params: DesignParams,
    Theta2: float,
    state,
    ref: ReferenceSample,
    eps_div: float = 1e-3,
    thrust_max_factor: float = 4.0,
) -> float:
    """Altitude law: thrust that tracks z* for pitch x5.

    Raises:
        NearSingularAttitude: if |cos(x5)| < eps_div.
    """
    c = math.cos(state[4])
    if abs(c) < eps_div:
        raise NearSingularAttitude(f"|cos(phi)|={abs(c):.3g} below {eps_div}")
    e3, e4 = _loop_errors(gains.k3, ref.pos[2], ref.vel[2], state[2], state[3])
    T1 = params.M / c * (
        params.g - params.beta * Theta2 / params.M + ref.acc[2] + _backstep(gains.k3, gains.k4, e3, e4)
    )
    return _clamp(T1, 0.0, thrust_max_factor * params.M * params.g)


def virtual_uy_2d(gains: GainSet, params: DesignParams, Theta1: float, T1: float, state, ref) -> float:
    """Lateral law: u_y = sin(phi*), clamped to [-1, 1].

    Raises:
        ZeroThrust: if T1 <= 0.
    """
    if not T1 > 0:
        raise ZeroThrust("lateral law needs positive thrust")
    e1, e2 = _loop_errors(gains.k5, ref.pos[1], ref.vel[1], state[0], state[1])
    uy = params.M / T1 * (
        -params.beta * Theta1 / params.M + ref.acc[1] + _backstep(gains.k5, gains.k6, e1, e2)
    )
    return _clamp(uy, -1.0, 1.0)


def desired_pitch_2d(u_y: float) -> float:
    return math.asin(_clamp(u_y, -1.0, 1.0))


def _filtered_rate(prev_value, prev_rate, value, Ts, a):
    return prev_rate + a * ((value - prev_value) / Ts - prev_rate)


class _AxisResult(NamedTuple):
    raw: float
    sat: float
    e_a: float
    e_b: float
    e_bar_a: float
    e_bar_b: float
    e_star: float
    e_star_dot: float


def _compensated_axis(ka, kb, ea, eb, e_star, e_star_dot, scale, L, beta, eps1, I_c, Ts, sign, enabled):
    """Shared pitch/roll inner loop with saturation and anti-windup.

    ``scale`` maps the bracket to a raw swash command; ``sign`` is the
    direction in which a positive command accelerates the controlled angle.
    Returns the raw and saturated command plus the advanced compensator.
    """
    if not enabled:
        e_star = e_star_dot = 0.0
    bar_a = ea - e_star
    bar_b = eb - e_star_dot
    raw = scale * _backstep(ka, kb, bar_a, bar_b)
    sat = saturate_ell(raw, L)
    if enabled:
        new_rate = -beta * eps1 / I_c * e_star + sign * beta * (raw - sat) / I_c
        new_e = e_star + Ts * new_rate
    else:
        new_rate = new_e = 0.0
    return _AxisResult(raw, sat, ea, eb, bar_a, bar_b, new_e, new_rate)


def _pitch_axis_2d(gains, params, I_c, T1, state, x5_star, cs: ControllerState, opts: ControlOptions):
    if not T1 > 0:
        raise ZeroThrust("pitch law needs positive thrust")
    c = math.cos(state[4])
    if abs(c) < opts.eps_div:
        raise NearSingularAttitude(f"|cos(phi)|={abs(c):.3g} below {opts.eps_div}")
    rate = _filtered_rate(cs.prev_phi_star, cs.phi_star_rate, x5_star, opts.Ts, opts.filter_gain)
    e5 = x5_star - state[4]
    e6 = rate + gains.k1 * e5 - state[5]
    res = _compensated_axis(
        gains.k1, gains.k2, e5, e6, cs.e_star, cs.e_star_dot,
        I_c / (params.beta * T1 * c), params.L, params.beta, gains.epsilon1, I_c,
        opts.Ts, 1.0, opts.compensator,
    )
    new_cs = replace(
        cs,
        e_star=res.e_star,
        e_star_dot=res.e_star_dot,
        prev_phi_star=x5_star,
        phi_star_rate=rate,
    )
    return res, new_cs


def ell_law_2d(
    gains: GainSet,
    params: DesignParams,
    I_c: float,
    T1: float,
    state,
    x5_star: float,
    ctrl_state: ControllerState,
    opts: ControlOptions = ControlOptions(),
):
    """Pitch law: swash command that tracks x5*.

    The desired pitch rate comes from the filtered differentiator held in
    ``ctrl_state``.  The compensated errors use the auxiliary error and its
    rate from the previous step; the auxiliary error is then advanced by
    one explicit Euler step.

    Returns:
        (raw command, saturated command, new controller state)

    Raises:
        ZeroThrust, NearSingularAttitude.
    """
    res, cs = _pitch_axis_2d(gains, params, I_c, T1, state, x5_star, ctrl_state, opts)
    return res.raw, res.sat, cs


def lyapunov_vdot_check(gains: GainSet, subsystem: str, errors) -> float:
    """Closed-loop Lyapunov derivative -ka ea^2 - kb eb^2 of one loop."""
    pairs = {
        "altitude": (gains.k3, gains.k4),
        "lateral": (gains.k5, gains.k6),
        "pitch": (gains.k1, gains.k2),
    }
    if subsystem not in pairs:
        raise ValueError(f"unknown subsystem {subsystem!r}")
    ka, kb = pairs[subsystem]
    ea, eb = errors
    return -ka * ea * ea - kb * eb * eb


def lyapunov_value(errors) -> float:
    """V = 1/2 sum(e^2)."""
    return 0.5 * sum(e * e for e in errors)


class Output2D(NamedTuple):
    T1: float
    ell_raw: float
    ell_cmd: float
    phi_star: float
    errors: TrackingErrors


def control_step_2d(
    gains: GainSet,
    params: DesignParams,
    state,
    ref: ReferenceSample,
    ctrl_state: ControllerState,
    opts: ControlOptions = ControlOptions(),
):
    """One full planar controller step.

    Returns:
        (Output2D, new ControllerState)
    """
    T1 = thrust_law_2d(gains, params, gains.theta2, state, ref, opts.eps_div, opts.thrust_max_factor)
    if not T1 > 0:
        raise ZeroThrust("altitude law saturated at zero thrust")
    uy = virtual_uy_2d(gains, params, gains.theta1, T1, state, ref)
    phi_star = _clamp(desired_pitch_2d(uy), -opts.angle_limit, opts.angle_limit)
    I_c = opts.inertias(params)[0]
    res, cs = _pitch_axis_2d(gains, params, I_c, T1, state, phi_star, ctrl_state, opts)
    e1, e2 = _loop_errors(gains.k5, ref.pos[1], ref.vel[1], state[0], state[1])
    e3, e4 = _loop_errors(gains.k3, ref.pos[2], ref.vel[2], state[2], state[3])
    errors = TrackingErrors(
        e1=e1, e2=e2, e3=e3, e4=e4, e5=res.e_a, e6=res.e_b,
        e_star=ctrl_state.e_star if opts.compensator else 0.0,
        e_star_dot=ctrl_state.e_star_dot if opts.compensator else 0.0,
        e_bar5=res.e_bar_a, e_bar6=res.e_bar_b,
    )
    return Output2D(T1, res.raw, res.sat, phi_star, errors), cs


def decoupling_matrix(angles) -> np.ndarray:
    """Attitude-dependent change of input for the rotational loops.

    Element (2, 1) uses sin(theta) (not cos(theta)) so every row is a unit
    vector, as the rest of the matrix requires.
    """
    phi, theta, psi = angles
    sf, cf = math.sin(phi), math.cos(phi)
    st, ct = math.sin(theta), math.cos(theta)
    sp, cp = math.sin(psi), math.cos(psi)
    return np.array(
        [
            [cf * sp - cp * sf * st, cp * ct, sf * sp + cf * cp * st],
            [cf * cp + sf * sp * st, ct * sp, -cp * sf + cf * sp * st],
            [ct * sf, st, cf * ct],
        ]
    )


def decoupling_inputs_3d(angles, v) -> tuple:
    """Map (v1, v2, v3) to (beta T1 ell_y, beta T1 ell_x, M_psi)."""
    out = decoupling_matrix(angles) @ np.asarray(v, dtype=float)
    return float(out[0]), float(out[1]), float(out[2])


class Output3D(NamedTuple):
    inputs: ControlInputs
    ell_raw: tuple
    desired: tuple
    errors: TrackingErrors


def control_step_3d_detailed(
    gains: GainSet,
    params: DesignParams,
    state: VehicleState,
    ref: ReferenceSample,
    ctrl_state: ControllerState,
    opts: ControlOptions = ControlOptions(),
):
    """3D controller step returning diagnostics; see :func:`control_step_3d`."""
    cs = ctrl_state
    phi, theta, psi = state.angles
    x, y, z = state.pos
    vx, vy, vz = state.vel
    M, g, b = params.M, params.g, params.beta
    I_c, I_cy, I_cz = opts.inertias(params)
    a_f = opts.filter_gain
    Ts = opts.Ts

    # Step 1: thrust and horizontal virtual inputs
    cc = math.cos(phi) * math.cos(theta)
    if abs(cc) < opts.eps_div:
        raise NearSingularAttitude(f"|cos(phi)cos(theta)|={abs(cc):.3g} below {opts.eps_div}")
    e3, e4 = _loop_errors(gains.k3, ref.pos[2], ref.vel[2], z, vz)
    T1 = M / cc * (g - b * gains.theta2 / M + ref.acc[2] + _backstep(gains.k3, gains.k4, e3, e4))
    T1 = _clamp(T1, 0.0, opts.thrust_max_factor * M * g)
    if not T1 > 0:
        raise ZeroThrust("altitude law saturated at zero thrust")
    e7, e8 = _loop_errors(gains.k7, ref.pos[0], ref.vel[0], x, vx)
    e1, e2 = _loop_errors(gains.k5, ref.pos[1], ref.vel[1], y, vy)
    ux = M / T1 * (-b * gains.theta1 / M + ref.acc[0] + _backstep(gains.k7, gains.k8, e7, e8))
    uy = M / T1 * (-b * gains.theta1 / M + ref.acc[1] + _backstep(gains.k5, gains.k6, e1, e2))

    # Step 3 heading first: the tilt targets depend on psi*
    if opts.yaw_guidance:
        dx, dy = ref.pos[0] - x, ref.pos[1] - y
        if math.hypot(dx, dy) < opts.yaw_hold_radius:
            psi_star = cs.prev_psi_star
        else:
            psi_star = math.atan2(dy, dx)
    else:
        psi_star = opts.psi_ref
    heading = psi_star if opts.tilt_heading == "desired" else psi
    sps, cps = math.sin(heading), math.cos(heading)

    # Step 1b: tilt targets
    lim = opts.angle_limit
    phi_star = _clamp(math.asin(_clamp(ux * sps - uy * cps, -1.0, 1.0)), -lim, lim)
    if opts.roll_loop:
        arg = (ux * cps + uy * sps) / math.cos(phi_star)
        theta_star = _clamp(math.asin(_clamp(arg, -1.0, 1.0)), -lim, lim)
    else:
        theta_star = 0.0

    phi_rate = _filtered_rate(cs.prev_phi_star, cs.phi_star_rate, phi_star, Ts, a_f)
    theta_rate = _filtered_rate(cs.prev_theta_star, cs.theta_star_rate, theta_star, Ts, a_f)
    psi_step = wrap_angle(psi_star - cs.prev_psi_star)
    psi_rate = cs.psi_star_rate + a_f * (psi_step / Ts - cs.psi_star_rate)

    dphi, dtheta, dpsi = euler_rates_from_body_omega(state.angles, state.omega)

    # Step 2: pitch (ell_y) and roll (ell_x) virtual torques
    e5 = phi_star - phi
    e6 = phi_rate + gains.k1 * e5 - dphi
    e9 = theta_star - theta
    e10 = theta_rate + gains.k9 * e9 - dtheta
    comp = opts.compensator
    es_y, esd_y = (cs.e_star, cs.e_star_dot) if comp else (0.0, 0.0)
    es_x, esd_x = (cs.e_star_x, cs.e_star_x_dot) if comp else (0.0, 0.0)
    bar5, bar6 = e5 - es_y, e6 - esd_y
    bar9, bar10 = e9 - es_x, e10 - esd_x
    v1 = I_c * _backstep(gains.k1, gains.k2, bar5, bar6)
    v2 = I_cy * _backstep(gains.k9, gains.k10, bar9, bar10)

    # Step 3: yaw torque
    e_psi = wrap_angle(psi_star - psi)
    e_psi_dot = psi_rate + gains.k_psi1 * e_psi - dpsi
    v3 = I_cz * _backstep(gains.k_psi1, gains.k_psi2, e_psi, e_psi_dot)

    # Swash moments are yaw invariant, so the matrix is evaluated at psi = 0.
    # A(0) routes its second input to ell_y and its first to ell_x; a
    # positive ell_y rolls the body negatively about x, hence -v1.
    A = decoupling_matrix((phi, theta, 0.0))
    w = (v2, -v1, v3)
    bty = A[0, 0] * w[0] + A[0, 1] * w[1] + A[0, 2] * w[2]
    btx = A[1, 0] * w[0] + A[1, 1] * w[1] + A[1, 2] * w[2]
    M_psi = A[2, 0] * w[0] + A[2, 1] * w[1] + A[2, 2] * w[2]
    ly_raw = float(bty) / (b * T1)
    lx_raw = float(btx) / (b * T1)
    ly = saturate_ell(ly_raw, params.L)
    lx = saturate_ell(lx_raw, params.L)

    if comp:
        # ell_y drives phi negatively, ell_x drives theta positively
        esd_y_new = -b * gains.epsilon1 / I_c * es_y - b * (ly_raw - ly) / I_c
        esd_x_new = -b * gains.epsilon1 / I_cy * es_x + b * (lx_raw - lx) / I_cy
        es_y_new = es_y + Ts * esd_y_new
        es_x_new = es_x + Ts * esd_x_new
    else:
        esd_y_new = esd_x_new = es_y_new = es_x_new = 0.0

    new_cs = ControllerState(
        e_star=es_y_new,
        e_star_dot=esd_y_new,
        e_star_x=es_x_new,
        e_star_x_dot=esd_x_new,
        prev_phi_star=phi_star,
        phi_star_rate=phi_rate,
        prev_theta_star=theta_star,
        theta_star_rate=theta_rate,
        prev_psi_star=psi_star,
        psi_star_rate=psi_rate,
    )
    errors = TrackingErrors(
        e1=e1, e2=e2, e3=e3, e4=e4, e5=e5, e6=e6, e7=e7, e8=e8, e9=e9, e10=e10,
        e_psi=e_psi, e_psi_dot=e_psi_dot, e_star=es_y, e_star_dot=esd_y,
        e_bar5=bar5, e_bar6=bar6,
    )
    inputs = ControlInputs(T1=T1, ell_x_cmd=lx, ell_y_cmd=ly, M_psi=float(M_psi))
    return Output3D(inputs, (lx_raw, ly_raw), (phi_star, theta_star, psi_star), errors), new_cs


def control_step_3d(gains, params, state, ref, ctrl_state, opts: ControlOptions = ControlOptions()):
    """One full 3D controller step.

    Raises:
        NearSingularAttitude, ZeroThrust, GimbalLock.

    Returns:
        (ControlInputs, new ControllerState)
    """
    out, cs = control_step_3d_detailed(gains, params, state, ref, ctrl_state, opts)
    return out.inputs, cs

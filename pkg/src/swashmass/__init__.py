"""Simulation and back-stepping control of a swash-mass UAV.

The vehicle tilts by sliding internal masses instead of using a swash
plate.  This package provides its rigid-body models, the back-stepping
controller with anti-windup, reference trajectories, a fixed-step
closed-loop simulator and the sizing sweep.
"""

from .actuation import RotorSpeeds, ServoState, allocate_rotors, saturate_ell, servo_step
from .control import (
    ControllerState,
    ControlOptions,
    GainSet,
    PRESETS,
    TrackingErrors,
    control_step_2d,
    control_step_3d,
    decoupling_inputs_3d,
    desired_pitch_2d,
    ell_law_2d,
    gain_preset,
    lyapunov_vdot_check,
    thrust_law_2d,
    virtual_uy_2d,
)
from .core_math import (
    EulerAngles,
    Vec3,
    cross,
    euler_rates_from_body_omega,
    rotation_body_to_inertial,
)
from .errors import *  # noqa: F401,F403
from .sim import SimConfig, SimLog, lyapunov_trace, rk4_step, rmse, run_closed_loop, summary
from .sizing import SizingSweep, phi_max_surface, pitch_response, triangle_input
from .trajectories import (
    ReferenceSample,
    complex_reference,
    hover_reference,
    linear_reference,
    sampled_reference,
)
from .vehicle import (
    ControlInputs,
    DesignParams,
    MotionLimits,
    State2D,
    SwashMotion,
    VehicleState,
    constant_inertia,
    derivatives_2d_full,
    derivatives_2d_simplified,
    derivatives_3d,
    inertia,
    inertia_dot,
    moment_about_cm,
    r_delta_body,
    theta_bounds,
)

__version__ = "0.1.0"

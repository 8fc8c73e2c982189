"""Fast self-check suite behind ``swashmass verify``.

Each check is an independent oracle comparison that runs in well under a
second.  Callers may substitute the thrust law to confirm the suite notices
a broken implementation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .actuation import saturate_ell
from .control import PRESETS, lyapunov_vdot_check, thrust_law_2d
from .core_math import rotation_body_to_inertial
from .trajectories import hover_reference
from .vehicle import (
    ControlInputs,
    DesignParams,
    State2D,
    VehicleState,
    constant_inertia,
    derivatives_2d_full,
    derivatives_3d,
    inertia,
)


@dataclass(frozen=True)
class CheckResult:
    name: str
    tolerance: str
    passed: bool
    detail: str


def point_mass_layout(params: DesignParams, ell_x: float, ell_y: float):
    """Five point masses whose second moments give the closed-form inertia.

    The body sits at (-2 beta ell_x, -2 beta ell_y, 0); the y-arm pair at
    (0, a ell_y +- L/2, 0) and the x-arm pair at (a ell_x +- L/2, 0, 0) with
    a = 1/2 - 2 beta.
    """
    b = params.beta
    a = 0.5 - 2.0 * b
    h = 0.5 * params.L
    return [
        (params.m_b, np.array([-2.0 * b * ell_x, -2.0 * b * ell_y, 0.0])),
        (params.m, np.array([0.0, a * ell_y + h, 0.0])),
        (params.m, np.array([0.0, a * ell_y - h, 0.0])),
        (params.m, np.array([a * ell_x + h, 0.0, 0.0])),
        (params.m, np.array([a * ell_x - h, 0.0, 0.0])),
    ]


def point_mass_inertia(masses) -> np.ndarray:
    """Inertia tensor sum m (|r|^2 E - r r^T) of point masses."""
    total = np.zeros((3, 3))
    for m, r in masses:
        total += m * (np.dot(r, r) * np.eye(3) - np.outer(r, r))
    return total


def _rotation(rng):
    worst_orth = worst_det = 0.0
    for _ in range(1000):
        ang = (rng.uniform(-math.pi, math.pi), rng.uniform(-1.5, 1.5), rng.uniform(-math.pi, math.pi))
        R = rotation_body_to_inertial(ang)
        worst_orth = max(worst_orth, float(np.max(np.abs(R.T @ R - np.eye(3)))))
        worst_det = max(worst_det, abs(float(np.linalg.det(R)) - 1.0))
    ok = worst_orth <= 1e-12 and worst_det <= 1e-12
    ident = np.array_equal(rotation_body_to_inertial((0.0, 0.0, 0.0)), np.eye(3))
    return [
        CheckResult("rotation_orthonormal", "1e-12", ok, f"max |RtR-I|={worst_orth:.2e}, max |det-1|={worst_det:.2e}"),
        CheckResult("rotation_identity", "exact", ident, "R(0,0,0) == I"),
    ]


def _inertia(rng, params):
    worst = 0.0
    for _ in range(1000):
        lx, ly = rng.uniform(-params.L, params.L, size=2)
        I = inertia(params, lx, ly, diagonal=True)
        ref = point_mass_inertia(point_mass_layout(params, lx, ly))
        for i in range(3):
            worst = max(worst, abs(I[i, i] - ref[i, i]) / ref[i, i])
    return CheckResult("inertia_point_mass", "1e-12 rel", worst <= 1e-12, f"max rel err={worst:.2e}")


def _hover(params):
    T = params.M * params.g
    d2 = derivatives_2d_full(params, State2D(), T)
    d3 = derivatives_3d(params, VehicleState(), ControlInputs(T1=T)).as_tuple()
    ok = all(v == 0.0 for v in d2) and all(v == 0.0 for v in d3)
    return CheckResult("hover_equilibrium", "exact", ok, f"max |d2|={max(map(abs, d2)):.1e}, max |d3|={max(map(abs, d3)):.1e}")


def _hover_thrust(params, thrust_law):
    ref = hover_reference()(0.0)
    worst = 0.0
    for gains in PRESETS.values():
        T = thrust_law(gains, params, 0.0, State2D(), ref)
        worst = max(worst, abs(T - params.M * params.g))
    return CheckResult("hover_thrust", "1e-12", worst <= 1e-12, f"max |T1 - Mg|={worst:.2e}")


def _lyapunov(rng):
    ok = True
    for gains in PRESETS.values():
        for sub in ("altitude", "lateral", "pitch"):
            e = rng.normal(scale=3.0, size=(10000, 2))
            v = np.array([lyapunov_vdot_check(gains, sub, row) for row in e])
            nonzero = np.any(e != 0, axis=1)
            ok &= bool(np.all(v[nonzero] < 0)) and lyapunov_vdot_check(gains, sub, (0.0, 0.0)) == 0.0
    return CheckResult("lyapunov_sign", "exact", ok, "Vdot < 0 off the origin, = 0 at it")


def _saturation(rng, params):
    L = params.L
    xs = np.sort(rng.uniform(-3 * L, 3 * L, size=2000))
    once = [saturate_ell(x, L) for x in xs]
    twice = [saturate_ell(x, L) for x in once]
    ok = once == twice and all(b >= a for a, b in zip(once, once[1:])) and max(map(abs, once)) <= L
    return CheckResult("saturation_idempotent", "exact", ok, "sat(sat(x)) == sat(x), monotone, |sat| <= L")


def _constant_inertia(params):
    err = abs(constant_inertia(params) - 0.002)
    return CheckResult("constant_inertia", "1e-15", err <= 1e-15, f"|I_c - 0.002|={err:.1e}")


def run_checks(thrust_law=thrust_law_2d, seed: int = 0) -> list:
    """Run every check with default vehicle constants."""
    rng = np.random.default_rng(seed)
    params = DesignParams()
    results = []
    results += _rotation(rng)
    results.append(_inertia(rng, params))
    results.append(_hover(params))
    results.append(_hover_thrust(params, thrust_law))
    results.append(_lyapunov(rng))
    results.append(_saturation(rng, params))
    results.append(_constant_inertia(params))
    return results


def format_table(results) -> str:
    width = max(len(r.name) for r in results)
    lines = [f"{'check':<{width}}  {'tolerance':<10}  result  detail"]
    for r in results:
        lines.append(f"{r.name:<{width}}  {r.tolerance:<10}  {'PASS' if r.passed else 'FAIL':<6}  {r.detail}")
    return "\n".join(lines)

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from swashmass import (
    ControlInputs,
    DesignParams,
    MotionLimits,
    OutOfRange,
    SingularInertia,
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
from swashmass.core_math import EulerAngles, Vec3, body_omega_from_euler_rates, rotation_body_to_inertial
from swashmass.vehicle import rigid_body_rates, shift_terms
from swashmass.verify import point_mass_inertia, point_mass_layout

BETA = 0.1 / 1.1


class TestDesignParams:
    def test_defaults_follow_table(self, params):
        assert (params.M, params.m, params.L, params.g) == (1.1, 0.1, 0.2, 9.81)
        assert params.m_b == pytest.approx(0.7, abs=1e-15)
        assert params.beta == pytest.approx(BETA)

    def test_mass_balance_enforced(self):
        with pytest.raises(ValueError):
            DesignParams(m_b=0.5)

    @pytest.mark.parametrize("kw", [{"L": 0.0}, {"g": -1.0}, {"gamma1": 0.0}, {"m": 0.3}])
    def test_invalid_values_rejected(self, kw):
        with pytest.raises(ValueError):
            DesignParams(**kw)

    def test_from_beta(self):
        p = DesignParams.from_beta(0.09, 0.3)
        assert p.beta == pytest.approx(0.09)
        assert p.M == 1.1 and p.L == 0.3


class TestRDelta:
    def test_origin_at_rest(self, params):
        assert r_delta_body(params, 0.0, 0.0) == (0.0, 0.0, 0.0)

    def test_x_displacement(self, params):
        r = r_delta_body(params, 0.1, 0.0)
        assert r.x == pytest.approx(-0.009091, abs=5e-7)
        assert r.y == 0.0 and r.z == 0.0

    def test_out_of_range(self, params):
        with pytest.raises(OutOfRange):
            r_delta_body(params, 0.3, 0.0)


class TestInertia:
    def test_ixx_independent_of_ell_x_and_angles(self, params):
        for ang in [(0, 0, 0), (0.4, -0.2, 1.0)]:
            assert inertia(params, 0.15, 0.0, ang)[0, 0] == pytest.approx(0.002, abs=1e-15)

    def test_printed_product_term_at_rest(self, params):
        assert inertia(params, 0.0, 0.0)[0, 1] == pytest.approx(-0.002, abs=1e-15)

    def test_structure(self, params, rng):
        for _ in range(100):
            lx, ly = rng.uniform(-0.2, 0.2, size=2)
            I = inertia(params, lx, ly, tuple(rng.uniform(-1, 1, size=3)))
            np.testing.assert_array_equal(I, I.T)
            assert I[0, 2] == I[1, 2] == 0.0
            assert np.all(np.diag(I) > 0)

    def test_diagonal_switch(self, params):
        I = inertia(params, 0.1, -0.05, (0.2, 0.1, 0.0), diagonal=True)
        assert I[0, 1] == 0.0 and I[1, 0] == 0.0

    def test_point_mass_oracle_random(self, params, rng):
        for _ in range(1000):
            lx, ly = rng.uniform(-params.L, params.L, size=2)
            I = inertia(params, lx, ly, diagonal=True)
            ref = point_mass_inertia(point_mass_layout(params, lx, ly))
            np.testing.assert_allclose(np.diag(I), np.diag(ref), rtol=1e-12)

    def test_point_mass_oracle_full_stroke(self, params):
        ref = point_mass_inertia(point_mass_layout(params, 0.0, params.L))
        assert inertia(params, 0.0, params.L)[0, 0] == pytest.approx(ref[0, 0], rel=1e-12)

    def test_closed_form_reduction(self, params, rng):
        # Ixx = M beta [ell^2 (1/2 - 8 beta^2) + L^2 / 2]
        b = params.beta
        for ell in rng.uniform(-0.2, 0.2, size=50):
            expected = params.M * b * (ell ** 2 * (0.5 - 8 * b * b) + params.L ** 2 / 2)
            assert inertia(params, 0.0, ell)[0, 0] == pytest.approx(expected, rel=1e-12)

    def test_out_of_range(self, params):
        with pytest.raises(OutOfRange):
            inertia(params, 0.0, -0.25)


class TestInertiaDot:
    def test_zero_without_motion(self, params):
        s = VehicleState(ell=(0.1, -0.05))
        np.testing.assert_array_equal(inertia_dot(params, s), np.zeros((3, 3)))

    def test_planar_coefficient(self, params, rng):
        b, m, mb = params.beta, params.m, params.m_b
        coef = m - 8 * b * m + 16 * b * b * m + 8 * b * b * mb
        for _ in range(100):
            ell, ell_dot = rng.uniform(-0.2, 0.2), rng.normal()
            s = VehicleState(ell=(0.0, ell), ell_dot=(0.0, ell_dot))
            assert abs(inertia_dot(params, s, diagonal=True)[0, 0] - coef * ell * ell_dot) <= 1e-10

    @pytest.mark.parametrize("diagonal", [True, False])
    def test_finite_difference_along_path(self, params, rng, diagonal):
        h = 1e-6
        for _ in range(50):
            c = rng.uniform(-1, 1, size=(4, 3))

            def path(t):
                lx = 0.1 * math.sin(c[0, 0] * t + c[0, 1])
                ly = 0.1 * math.sin(c[1, 0] * t + c[1, 1])
                ang = (0.5 * math.sin(c[2, 0] * t + c[2, 1]), 0.5 * math.sin(c[3, 0] * t + c[3, 1]), 0.3)
                return lx, ly, ang

            def rates(t):
                lxd = 0.1 * c[0, 0] * math.cos(c[0, 0] * t + c[0, 1])
                lyd = 0.1 * c[1, 0] * math.cos(c[1, 0] * t + c[1, 1])
                ad = (0.5 * c[2, 0] * math.cos(c[2, 0] * t + c[2, 1]),
                      0.5 * c[3, 0] * math.cos(c[3, 0] * t + c[3, 1]), 0.0)
                return lxd, lyd, ad

            t = rng.uniform(0, 5)
            lx, ly, ang = path(t)
            lxd, lyd, ad = rates(t)
            omega = body_omega_from_euler_rates(ang, ad)
            s = VehicleState(angles=EulerAngles(*ang), omega=omega, ell=(lx, ly), ell_dot=(lxd, lyd))
            analytic = inertia_dot(params, s, diagonal=diagonal)
            plus, minus = path(t + h), path(t - h)
            fd = (inertia(params, plus[0], plus[1], plus[2], diagonal)
                  - inertia(params, minus[0], minus[1], minus[2], diagonal)) / (2 * h)
            scale = np.max(np.abs(fd)) + 1e-12
            assert np.max(np.abs(analytic - fd)) <= 1e-6 * scale


class TestMoment:
    def test_zero_lever_arm(self, params):
        assert moment_about_cm(params, (0.3, 0.1, 0.2), (0.0, 0.0), 10.0) == (0.0, 0.0, 0.0)

    def test_y_offset_cross_product(self, params):
        # (0, -d, 0) x (0, 0, T) = (-d T, 0, 0) with d = beta * 0.1
        M = moment_about_cm(params, (0, 0, 0), (0.0, 0.1), 10.791)
        assert M.x == pytest.approx(-BETA * 0.1 * 10.791, rel=1e-12)
        assert M.x == pytest.approx(-0.09810, abs=1e-5)
        assert M.y == 0.0 and M.z == 0.0

    def test_pure_yaw(self, params):
        assert moment_about_cm(params, (0, 0, 0), (0.0, 0.0), 0.0, 0.5) == (0.0, 0.0, 0.5)

    def test_rotates_with_body(self, params, rng):
        for _ in range(20):
            ang = tuple(rng.uniform(-1, 1, size=3))
            ell = tuple(rng.uniform(-0.2, 0.2, size=2))
            r = np.array(r_delta_body(params, *ell))
            body = np.cross(r, [0, 0, 7.0]) + [0, 0, 0.3]
            np.testing.assert_allclose(
                moment_about_cm(params, ang, ell, 7.0, 0.3), rotation_body_to_inertial(ang) @ body, atol=1e-14
            )


def _numpy_rigid_body(params, x, ell, ell_dot, ell_ddot, T1, M_psi, diagonal):
    """Independent matrix-form evaluation of the 3D equations."""
    ang = x[6:9]
    w = np.array(x[9:12])
    I = inertia(params, ell[0], ell[1], ang, diagonal)
    W = np.array([[1, math.sin(ang[0]) * math.tan(ang[1]), math.cos(ang[0]) * math.tan(ang[1])],
                  [0, math.cos(ang[0]), -math.sin(ang[0])],
                  [0, math.sin(ang[0]) / math.cos(ang[1]), math.cos(ang[0]) / math.cos(ang[1])]])
    rates = W @ w
    s = VehicleState(angles=EulerAngles(*ang), omega=Vec3(*w), ell=ell, ell_dot=ell_dot)
    Id = inertia_dot(params, s, diagonal)
    R = rotation_body_to_inertial(ang)
    MC = np.array(moment_about_cm(params, ang, ell, T1, M_psi))
    wd = np.linalg.solve(I, R.T @ MC - Id @ w)
    b = params.beta
    r = -b * np.array([ell[0], ell[1], 0.0])
    rd = -b * np.array([ell_dot[0], ell_dot[1], 0.0])
    rdd = -b * np.array([ell_ddot[0], ell_ddot[1], 0.0])
    bracket = rdd + 2 * np.cross(w, rd) + np.cross(wd, r) + np.cross(w, np.cross(w, r))
    acc = R @ bracket + np.array([0, 0, -params.g]) + R @ np.array([0, 0, T1]) / params.M
    return np.concatenate([x[3:6], acc, rates, wd])


class TestDerivatives3D:
    def test_hover_is_equilibrium(self, params):
        d = derivatives_3d(params, VehicleState(), ControlInputs(T1=params.M * params.g))
        assert all(v == 0.0 for v in d.as_tuple())

    def test_free_fall(self, params):
        d = derivatives_3d(params, VehicleState(), ControlInputs(T1=0.0))
        assert d.acc == (0.0, 0.0, -params.g)

    def test_printed_product_term_is_singular_at_rest(self, params):
        with pytest.raises(SingularInertia):
            derivatives_3d(params, VehicleState(), ControlInputs(T1=10.0), diagonal_inertia=False)

    @pytest.mark.parametrize("diagonal", [True, False])
    def test_matches_matrix_oracle(self, params, rng, diagonal):
        for _ in range(200):
            x = np.concatenate([rng.normal(size=6), rng.uniform(-1, 1, size=3), rng.normal(size=3)])
            ell = tuple(rng.uniform(0.05, 0.2, size=2) * rng.choice([-1, 1], size=2))
            ell_dot, ell_ddot = tuple(rng.normal(size=2)), tuple(rng.normal(size=2))
            T, Mpsi = rng.uniform(0, 30), rng.normal()
            try:
                got = rigid_body_rates(params, tuple(x), ell, ell_dot, ell_ddot, T, Mpsi, diagonal)
            except SingularInertia:
                continue
            expected = _numpy_rigid_body(params, x, ell, ell_dot, ell_ddot, T, Mpsi, diagonal)
            np.testing.assert_allclose(got, expected, rtol=1e-9, atol=1e-9)

    def test_planar_restriction_matches_2d(self, params, rng):
        for _ in range(1000):
            y, vy, z, vz, phi, w = rng.uniform(-1.5, 1.5, size=6)
            ell, ell_dot, ell_ddot = rng.uniform(-0.2, 0.2), rng.normal(), rng.normal(scale=5)
            T = rng.uniform(0, 40)
            d2 = derivatives_2d_full(params, (y, vy, z, vz, phi, w), T, SwashMotion(ell, ell_dot, ell_ddot))
            # planar pitch phi is a roll of -phi about body x
            state = VehicleState(
                pos=Vec3(0.0, y, z), vel=Vec3(0.0, vy, vz),
                angles=EulerAngles(-phi, 0.0, 0.0), omega=Vec3(-w, 0.0, 0.0),
                ell=(0.0, ell), ell_dot=(0.0, ell_dot), ell_ddot=(0.0, ell_ddot),
            )
            d3 = derivatives_3d(params, state, ControlInputs(T1=T))
            np.testing.assert_allclose(
                (d3.acc.y, d3.acc.z, -d3.angle_rates.x, -d3.omega_dot.x),
                (d2[1], d2[3], d2[4], d2[5]),
                rtol=0, atol=1e-9,
            )
            assert d3.acc.x == 0.0 and d3.omega_dot.y == 0.0 and d3.omega_dot.z == 0.0


class TestDerivatives2D:
    def test_hover(self, params):
        assert derivatives_2d_full(params, State2D(), params.M * params.g) == (0.0,) * 6

    def test_pitch_from_displacement(self, params):
        d = derivatives_2d_full(params, State2D(), 10.791, SwashMotion(0.1, 0.0, 0.0))
        ixx = inertia(params, 0.0, 0.1)[0, 0]
        assert d[5] == pytest.approx(BETA * 10.791 * 0.1 / ixx, rel=1e-12)

    def test_simplified_reduces_to_point_mass(self, params):
        s = State2D(phi=0.3)
        d = derivatives_2d_simplified(params, 0.002, s, 12.0)
        assert d[1] == pytest.approx(12.0 * math.sin(0.3) / params.M)
        assert d[3] == pytest.approx(12.0 * math.cos(0.3) / params.M - params.g)
        assert d[5] == 0.0

    def test_simplified_no_pitch_torque_at_quarter_turn(self, params):
        d = derivatives_2d_simplified(params, 0.002, State2D(phi=math.pi / 2), 12.0, SwashMotion(0.15))
        # cos(pi/2) is 6e-17 in floating point, scaled by beta T ell / I_c ~ 82
        assert abs(d[5]) < 1e-14

    def test_simplified_fidelity_near_hover(self, params, rng):
        # translational: within 2% of max(|a|, g); angular: within 2% relative
        I_c = constant_inertia(params)
        for _ in range(2000):
            ell = rng.uniform(-0.02, 0.02)
            s = State2D(*rng.normal(size=4), rng.uniform(-0.05, 0.05), rng.uniform(-0.1, 0.1))
            T = params.M * params.g / math.cos(s.phi)
            full = derivatives_2d_full(params, s, T, SwashMotion(ell))
            simp = derivatives_2d_simplified(params, I_c, s, T, SwashMotion(ell))
            for i in (1, 3):
                assert abs(full[i] - simp[i]) <= 0.02 * max(abs(full[i]), params.g)
            assert abs(full[5] - simp[5]) <= 0.02 * abs(full[5]) + 1e-12


class TestBounds:
    def test_zero_limits(self, params):
        assert theta_bounds(params, MotionLimits()) == (0.0, 0.0)

    def test_single_term(self, params):
        assert theta_bounds(params, MotionLimits(ell_max=0.2, phi_dot_max=1.0)) == pytest.approx((0.2, 0.2))

    @given(st.lists(st.floats(0, 10), min_size=5, max_size=5))
    def test_doubling_limits_at_least_doubles(self, vals):
        p = DesignParams()
        t1 = theta_bounds(p, MotionLimits(*vals))[0]
        t2 = theta_bounds(p, MotionLimits(*[2 * v for v in vals]))[0]
        assert t2 >= 2 * t1 * (1 - 1e-12)

    def test_shift_terms_bounded(self, params, rng):
        lim = MotionLimits(ell_max=0.2, ell_dot_max=1.0, ell_ddot_max=20.0, phi_dot_max=3.0, phi_ddot_max=50.0)
        th1, th2 = theta_bounds(params, lim)
        for _ in range(100_000):
            phi = rng.uniform(-math.pi, math.pi)
            args = (rng.uniform(-3, 3), rng.uniform(-50, 50), rng.uniform(-0.2, 0.2),
                    rng.uniform(-1, 1), rng.uniform(-20, 20))
            f1, f2 = shift_terms(phi, *args)
            assert abs(f1) <= th1 and abs(f2) <= th2


class TestConstantInertia:
    def test_table_value(self, params):
        assert abs(constant_inertia(params) - 0.002) <= 1e-15

    def test_equals_inertia_at_rest(self, params):
        assert constant_inertia(params) == inertia(params, 0.0, 0.0)[0, 0]

    @given(st.floats(0.01, 0.24), st.floats(0.01, 2.0))
    def test_positive(self, beta, L):
        assert constant_inertia(DesignParams.from_beta(beta, L)) > 0

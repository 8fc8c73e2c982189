import math

import numpy as np
import pytest

from swashmass import MalformedTable, complex_reference, hover_reference, linear_reference, sampled_reference
from swashmass.trajectories import load_trajectory_csv


def _fd_check(ref, ts, h=1e-6, tol=1e-6):
    for t in ts:
        p_plus, p_minus = np.array(ref(t + h).pos), np.array(ref(t - h).pos)
        v_plus, v_minus = np.array(ref(t + h).vel), np.array(ref(t - h).vel)
        np.testing.assert_allclose((p_plus - p_minus) / (2 * h), ref(t).vel, atol=tol)
        np.testing.assert_allclose((v_plus - v_minus) / (2 * h), ref(t).acc, atol=tol)


class TestLinear:
    def test_start(self):
        assert linear_reference(0.0).pos == (0.0, 0.0, 0.0)

    def test_ten_seconds(self):
        r = linear_reference(10.0)
        assert r.pos.y == pytest.approx(8.57) and r.pos.z == pytest.approx(8.57)

    def test_no_acceleration(self):
        for t in np.linspace(0, 20, 11):
            assert linear_reference(t).acc == (0.0, 0.0, 0.0)

    def test_finite_differences(self):
        _fd_check(linear_reference, np.linspace(0.1, 10, 7))


class TestComplex:
    def test_start(self):
        r = complex_reference(0.0)
        assert r.pos == (0.0, 0.0, 0.0) and r.vel == (0.0, 2.0, 5.0)

    def test_at_pi(self):
        r = complex_reference(math.pi)
        assert r.pos.y == pytest.approx(4.0) and r.pos.z == pytest.approx(0.0, abs=1e-15)

    def test_finite_differences(self):
        _fd_check(complex_reference, np.linspace(0.1, 14, 9))


def test_hover_reference_constant():
    ref = hover_reference((1.0, 2.0, 3.0))
    assert ref(0.0) == ref(5.0)
    assert ref(2.0).pos == (1.0, 2.0, 3.0) and ref(2.0).vel == (0.0, 0.0, 0.0)


class TestSampled:
    def _linear_table(self, n=11):
        return [(t, tuple(linear_reference(t).pos)) for t in np.linspace(0, 10, n)]

    def test_reproduces_linear(self):
        ref = sampled_reference(self._linear_table())
        for t in np.linspace(0.05, 9.95, 37):
            np.testing.assert_allclose(ref(t).pos, linear_reference(t).pos, atol=1e-9)
            np.testing.assert_allclose(ref(t).vel, linear_reference(t).vel, atol=1e-9)

    def test_too_short(self):
        with pytest.raises(MalformedTable):
            sampled_reference(self._linear_table()[:3])

    def test_unsorted(self):
        table = self._linear_table()
        table[3], table[4] = table[4], table[3]
        with pytest.raises(MalformedTable):
            sampled_reference(table)

    def test_clamped_outside(self):
        ref = sampled_reference([(t + 1.0, p) for t, p in self._linear_table()])
        before = ref(0.0)
        assert before.pos == (0.0, 0.0, 0.0) and before.vel == (0.0, 0.0, 0.0)
        after = ref(100.0)
        assert after.pos.y == pytest.approx(8.57) and after.acc == (0.0, 0.0, 0.0)

    def test_finite_differences(self):
        table = [(t, (math.sin(t), math.cos(t), t * t)) for t in np.linspace(0, 6, 25)]
        _fd_check(sampled_reference(table), np.linspace(0.3, 5.7, 9), tol=1e-5)

    def test_csv_loader(self, tmp_path):
        path = tmp_path / "traj.csv"
        lines = ["t,x,y,z"] + [f"{t},{p[0]},{p[1]},{p[2]}" for t, p in self._linear_table()]
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        ref = load_trajectory_csv(path)
        assert ref(5.0).pos.z == pytest.approx(4.285, abs=1e-9)

    def test_csv_bad_header(self, tmp_path):
        path = tmp_path / "traj.csv"
        path.write_text("time,x,y,z\n0,0,0,0\n", encoding="utf-8")
        with pytest.raises(MalformedTable):
            load_trajectory_csv(path)

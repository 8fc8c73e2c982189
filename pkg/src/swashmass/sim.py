"""Fixed-step closed-loop simulation, logging and error metrics.

Each step samples the reference, runs the controller on the current plant
state, advances the swash servo, then integrates the plant one RK4 step
with the controls and servo outputs held.  Controller and integrator share
the step ``Ts``.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .actuation import ServoState, servo_step
from .control import (
    ControllerState,
    ControlOptions,
    GainSet,
    control_step_2d,
    control_step_3d_detailed,
    lyapunov_value,
)
from .errors import ConfigError, Diverged, EmptyLog, SwashMassError
from .vehicle import (
    DesignParams,
    State2D,
    SwashMotion,
    VehicleState,
    constant_inertia,
    derivatives_2d_full,
    derivatives_2d_simplified,
    rigid_body_rates,
)

MODELS = ("full2d", "simplified2d", "full3d")

CSV_COLUMNS = (
    "t", "y", "z", "phi", "x", "theta", "psi",
    "T1", "ell_x", "ell_y", "M_psi",
    "y_ref", "z_ref", "x_ref",
    "e_star", "V_alt", "V_lat", "V_pitch",
)
# kept in memory for analysis, not written to the trace file
EXTRA_COLUMNS = ("e1", "e2", "e3", "e4", "e5", "e6", "e_bar5", "e_bar6", "phi_star", "ell_y_raw")
ALL_COLUMNS = CSV_COLUMNS + EXTRA_COLUMNS

# |ell| at or above L - SAT_TOL counts as saturated
SAT_TOL = 1e-12


def rk4_step(f, state, dt: float):
    """One classical Runge-Kutta step of ``x' = f(x)``.

    ``state`` may be a float, a tuple/list of floats or a numpy array; the
    result has the same kind (tuples for sequences).
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    if isinstance(state, np.ndarray) or np.isscalar(state):
        k1 = np.asarray(f(state)) if isinstance(state, np.ndarray) else f(state)
        k2 = f(state + 0.5 * dt * k1)
        k3 = f(state + 0.5 * dt * k2)
        k4 = f(state + dt * k3)
        if isinstance(state, np.ndarray):
            k2, k3, k4 = np.asarray(k2), np.asarray(k3), np.asarray(k4)
        return state + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    h = 0.5 * dt
    k1 = f(state)
    k2 = f(tuple(x + h * d for x, d in zip(state, k1)))
    k3 = f(tuple(x + h * d for x, d in zip(state, k2)))
    k4 = f(tuple(x + dt * d for x, d in zip(state, k3)))
    c = dt / 6.0
    return tuple(
        x + c * (a + 2.0 * b + 2.0 * d + e) for x, a, b, d, e in zip(state, k1, k2, k3, k4)
    )


@dataclass(frozen=True)
class SimConfig:
    """Simulation settings.

    Attributes:
        Ts: Controller and integration step [s], 0 < Ts <= 0.01.
        Tf: Final time [s].
        model: Plant, one of ``full2d``, ``simplified2d``, ``full3d``.
        params: Vehicle constants.
        initial_state: ``State2D`` or ``VehicleState``; None is rest at origin.
        ideal_servo: Swash position equals the command (no servo lag).
        servo_wn, servo_zeta: Servo natural frequency [rad/s] and damping.
        diagonal_inertia: Drop the attitude-dependent I_xy product (3D).
        log_stride: Logging period [s].
        divergence_limit: Largest allowed |state component|.
        control: Controller options; its ``Ts`` is overridden by ``Ts``.
    """

    Ts: float = 1e-4
    Tf: float = 10.0
    model: str = "full2d"
    params: DesignParams = field(default_factory=DesignParams)
    initial_state: object = None
    ideal_servo: bool = True
    servo_wn: float = 200.0
    servo_zeta: float = 1.0
    diagonal_inertia: bool = True
    log_stride: float = 0.01
    divergence_limit: float = 1e6
    control: ControlOptions = field(default_factory=ControlOptions)

    def __post_init__(self):
        if not (0 < self.Ts <= 0.01):
            raise ConfigError(f"Ts must satisfy 0 < Ts <= 0.01, got {self.Ts}", field="Ts")
        if not self.Tf > self.Ts:
            raise ConfigError(f"Tf must exceed Ts, got {self.Tf}", field="Tf")
        if self.model not in MODELS:
            raise ConfigError(f"model must be one of {MODELS}, got {self.model!r}", field="model")
        if not self.log_stride > 0:
            raise ConfigError("log_stride must be positive", field="log_stride")
        if self.servo_wn <= 0 or self.servo_zeta <= 0:
            raise ConfigError("servo settings must be positive", field="servo_wn")
        if self.control.Ts != self.Ts:
            object.__setattr__(self, "control", replace(self.control, Ts=self.Ts))

    @property
    def steps(self) -> int:
        return int(round(self.Tf / self.Ts))

    @property
    def stride_steps(self) -> int:
        return max(1, int(round(self.log_stride / self.Ts)))


@dataclass
class SimLog:
    """Decimated time series of one closed-loop run.

    Attributes:
        columns: Column name -> array, all of equal length.
        model: Plant used.
        Ts: Simulation step [s].
        saturation: Axis name -> list of (start, end) times during which the
            swash command sat on the stroke limit, tracked every step.
        diverged: True when the run stopped early.
        divergence_time: Time of failure, if any.
    """

    columns: dict
    model: str
    Ts: float
    saturation: dict = field(default_factory=dict)
    diverged: bool = False
    divergence_time: float | None = None

    def __len__(self):
        return len(self.columns["t"])

    def __getitem__(self, name):
        return self.columns[name]

    @property
    def active_axes(self) -> tuple:
        return ("x", "y", "z") if self.model == "full3d" else ("y", "z")

    def csv_text(self) -> str:
        buf = io.StringIO()
        buf.write(",".join(CSV_COLUMNS) + "\n")
        cols = [self.columns[c] for c in CSV_COLUMNS]
        for i in range(len(self)):
            buf.write(",".join(format(float(col[i]), ".12g") for col in cols) + "\n")
        return buf.getvalue()

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(self.csv_text())


def rmse(log: SimLog, axis: str) -> float:
    """Root-mean-square tracking error on ``x``, ``y``, ``z`` or ``overall``.

    ``overall`` is the root-mean of the squared per-axis values over the
    axes active in the run.

    Raises:
        EmptyLog: if the log has no samples.
    """
    if len(log) == 0:
        raise EmptyLog("log has no samples")
    if axis == "overall":
        vals = [rmse(log, a) for a in log.active_axes]
        return math.sqrt(sum(v * v for v in vals) / len(vals))
    if axis not in ("x", "y", "z"):
        raise ValueError(f"unknown axis {axis!r}")
    err = np.asarray(log.columns[axis + "_ref"]) - np.asarray(log.columns[axis])
    return float(np.sqrt(np.mean(err * err)))


def lyapunov_trace(log: SimLog) -> dict:
    """Per-loop V(t) = 1/2 (ea^2 + eb^2) recomputed from the logged errors.

    The pitch loop uses the compensated errors.
    """
    c = log.columns
    e = {k: np.asarray(c[k]) for k in ("e1", "e2", "e3", "e4", "e_bar5", "e_bar6")}
    return {
        "V_alt": 0.5 * (e["e3"] ** 2 + e["e4"] ** 2),
        "V_lat": 0.5 * (e["e1"] ** 2 + e["e2"] ** 2),
        "V_pitch": 0.5 * (e["e_bar5"] ** 2 + e["e_bar6"] ** 2),
    }


def summary(log: SimLog) -> dict:
    """JSON-ready run summary."""
    out = {
        "model": log.model,
        "Ts": log.Ts,
        "samples": len(log),
        "t_end": float(log.columns["t"][-1]) if len(log) else None,
        "diverged": log.diverged,
        "divergence_time": log.divergence_time,
        "rmse": {},
        "rmse_overall": None,
        "saturation_intervals": {k: [list(iv) for iv in v] for k, v in log.saturation.items()},
    }
    if len(log):
        out["rmse"] = {a: rmse(log, a) for a in log.active_axes}
        out["rmse_overall"] = rmse(log, "overall")
    return out


def summary_json(log: SimLog) -> str:
    return json.dumps(summary(log), indent=2, sort_keys=True) + "\n"


class _SaturationTracker:
    def __init__(self):
        self.intervals = []
        self._start = None

    def update(self, t, saturated):
        if saturated and self._start is None:
            self._start = t
        elif not saturated and self._start is not None:
            self.intervals.append((self._start, t))
            self._start = None

    def close(self, t):
        if self._start is not None:
            self.intervals.append((self._start, t))
            self._start = None
        return self.intervals


def _finish(rows, cfg, trackers, t_end, diverged=False, when=None):
    columns = {name: np.array(vals, dtype=float) for name, vals in rows.items()}
    sat = {k: tr.close(t_end) for k, tr in trackers.items()}
    return SimLog(columns, cfg.model, cfg.Ts, sat, diverged, when)


def _check_bounds(state, limit):
    for v in state:
        if not abs(v) <= limit:
            return False
    return True


def run_closed_loop(cfg: SimConfig, gains: GainSet, reference) -> SimLog:
    """Simulate the closed loop from ``cfg.initial_state`` to ``cfg.Tf``.

    Raises:
        Diverged: if the state leaves the finite box ``divergence_limit`` or
            a model/controller error occurs; ``exc.log`` holds the samples
            recorded so far.
    """
    if cfg.model == "full3d":
        return _run_3d(cfg, gains, reference)
    return _run_2d(cfg, gains, reference)


def _new_rows():
    return {name: [] for name in ALL_COLUMNS}


def _run_2d(cfg, gains, reference):
    p = cfg.params
    opts = cfg.control
    Ts, n, stride, L = cfg.Ts, cfg.steps, cfg.stride_steps, p.L
    init = cfg.initial_state if cfg.initial_state is not None else State2D()
    if isinstance(init, VehicleState):
        raise ConfigError("planar model needs a State2D initial state", field="initial_state")
    s = tuple(float(v) for v in init)
    if cfg.model == "full2d":
        def plant(x, T1, sw):
            return derivatives_2d_full(p, x, T1, sw)
    else:
        I_c = opts.inertias(p)[0]

        def plant(x, T1, sw):
            return derivatives_2d_simplified(p, I_c, x, T1, sw)

    servo = ServoState(natural_frequency=cfg.servo_wn, damping=cfg.servo_zeta, L=L)
    cs = ControllerState.reset()
    rows = _new_rows()
    sat_y = _SaturationTracker()
    trackers = {"ell_y": sat_y}
    t = 0.0
    for k in range(n + 1):
        t = k * Ts
        ref = reference(t)
        try:
            out, cs = control_step_2d(gains, p, s, ref, cs, opts)
        except SwashMassError as exc:
            log = _finish(rows, cfg, trackers, t, True, t)
            raise Diverged(f"controller failed at t={t:.6g}: {exc}", t, log) from exc
        sat_y.update(t, abs(out.ell_cmd) >= L - SAT_TOL)
        if cfg.ideal_servo:
            sw = SwashMotion(out.ell_cmd, 0.0, 0.0)
        else:
            servo = servo_step(servo, out.ell_cmd, Ts)
            sw = SwashMotion(servo.ell, servo.ell_dot, servo.ell_ddot)

        if k % stride == 0:
            e = out.errors
            _append(
                rows, t, s[0], s[2], s[4], 0.0, 0.0, 0.0,
                out.T1, 0.0, sw.ell, 0.0, ref, e, out.phi_star, out.ell_raw,
            )
        if k == n:
            break
        try:
            s = rk4_step(lambda x: plant(x, out.T1, sw), s, Ts)
        except SwashMassError as exc:
            log = _finish(rows, cfg, trackers, t, True, t)
            raise Diverged(f"plant failed at t={t:.6g}: {exc}", t, log) from exc
        if not _check_bounds(s, cfg.divergence_limit):
            t_fail = (k + 1) * Ts
            log = _finish(rows, cfg, trackers, t_fail, True, t_fail)
            raise Diverged(f"state left the bounded region at t={t_fail:.6g}", t_fail, log)
    return _finish(rows, cfg, trackers, t)


def _append(rows, t, y, z, phi, x, theta, psi, T1, ell_x, ell_y, M_psi, ref, e, phi_star, ell_y_raw):
    vals = (
        t, y, z, phi, x, theta, psi, T1, ell_x, ell_y, M_psi,
        ref.pos[1], ref.pos[2], ref.pos[0],
        e.e_star,
        lyapunov_value((e.e3, e.e4)),
        lyapunov_value((e.e1, e.e2)),
        lyapunov_value((e.e_bar5, e.e_bar6)),
        e.e1, e.e2, e.e3, e.e4, e.e5, e.e6, e.e_bar5, e.e_bar6, phi_star, ell_y_raw,
    )
    for name, v in zip(ALL_COLUMNS, vals):
        rows[name].append(v)


def _run_3d(cfg, gains, reference):
    p = cfg.params
    opts = cfg.control
    Ts, n, stride, L = cfg.Ts, cfg.steps, cfg.stride_steps, p.L
    init = cfg.initial_state if cfg.initial_state is not None else VehicleState()
    if not isinstance(init, VehicleState):
        raise ConfigError("full3d model needs a VehicleState initial state", field="initial_state")
    x = tuple(float(v) for v in init.rigid_vector())
    ell, ell_dot, ell_ddot = tuple(init.ell), tuple(init.ell_dot), tuple(init.ell_ddot)
    servos = [
        ServoState(ell[i], ell_dot[i], ell_ddot[i], cfg.servo_wn, cfg.servo_zeta, L) for i in range(2)
    ]
    diag = cfg.diagonal_inertia
    cs = ControllerState.reset()
    rows = _new_rows()
    trackers = {"ell_x": _SaturationTracker(), "ell_y": _SaturationTracker()}
    t = 0.0
    for k in range(n + 1):
        t = k * Ts
        ref = reference(t)
        state = VehicleState.from_rigid_vector(x, ell, ell_dot, ell_ddot)
        try:
            out, cs = control_step_3d_detailed(gains, p, state, ref, cs, opts)
        except SwashMassError as exc:
            log = _finish(rows, cfg, trackers, t, True, t)
            raise Diverged(f"controller failed at t={t:.6g}: {exc}", t, log) from exc
        u = out.inputs
        cmds = (u.ell_x_cmd, u.ell_y_cmd)
        trackers["ell_x"].update(t, abs(cmds[0]) >= L - SAT_TOL)
        trackers["ell_y"].update(t, abs(cmds[1]) >= L - SAT_TOL)
        if cfg.ideal_servo:
            ell, ell_dot, ell_ddot = cmds, (0.0, 0.0), (0.0, 0.0)
        else:
            servos = [servo_step(servos[i], cmds[i], Ts) for i in range(2)]
            ell = (servos[0].ell, servos[1].ell)
            ell_dot = (servos[0].ell_dot, servos[1].ell_dot)
            ell_ddot = (servos[0].ell_ddot, servos[1].ell_ddot)

        if k % stride == 0:
            _append(
                rows, t, x[1], x[2], x[6], x[0], x[7], x[8],
                u.T1, ell[0], ell[1], u.M_psi, ref, out.errors, out.desired[0], out.ell_raw[1],
            )
        if k == n:
            break
        try:
            x = rk4_step(
                lambda v: rigid_body_rates(p, v, ell, ell_dot, ell_ddot, u.T1, u.M_psi, diag), x, Ts
            )
        except SwashMassError as exc:
            log = _finish(rows, cfg, trackers, t, True, t)
            raise Diverged(f"plant failed at t={t:.6g}: {exc}", t, log) from exc
        if not _check_bounds(x, cfg.divergence_limit):
            t_fail = (k + 1) * Ts
            log = _finish(rows, cfg, trackers, t_fail, True, t_fail)
            raise Diverged(f"state left the bounded region at t={t_fail:.6g}", t_fail, log)
    return _finish(rows, cfg, trackers, t)

"""Run configuration files.

Configs are UTF-8 INI files with the sections ``vehicle``, ``gains``,
``scenario``, ``simulation``, ``theta_limits``, ``output`` and ``sizing``.
Every section and key is optional; unknown ones are rejected with the line
number of the offending entry.
"""

from __future__ import annotations

import configparser
import dataclasses
import math
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .control import PRESETS, ControlOptions, GainSet
from .errors import ConfigError
from .sim import MODELS, SimConfig
from .trajectories import complex_reference, hover_reference, linear_reference, load_trajectory_csv
from .vehicle import DesignParams, MotionLimits, theta_bounds

GAIN_KEYS = (
    "k1", "k2", "k3", "k4", "k5", "k6", "k7", "k8", "k9", "k10",
    "k_psi1", "k_psi2", "epsilon1", "theta1", "theta2",
)
THETA_MODES = ("zero", "bounds", "explicit")
SCENARIOS = ("linear", "complex", "hover")


@dataclass(frozen=True)
class SizingSettings:
    """Grid and input settings for the pitch-response sweep."""

    betas: tuple = (0.03, 0.06, 0.09, 0.15, 0.2)
    Ls: tuple = (0.1, 0.2, 0.3, 0.35, 0.4)
    amplitude: float | None = None
    period: float = 4.0
    Tf: float | None = None
    dt: float = 1e-3
    traces: tuple = ()


@dataclass(frozen=True)
class RunConfig:
    """Everything a CLI run needs, validated at construction."""

    params: DesignParams = field(default_factory=DesignParams)
    preset: str | None = "linear"
    gain_overrides: tuple = ()
    scenario: str = "linear"
    hover_point: tuple = (0.0, 0.0, 0.0)
    model: str = "full2d"
    Ts: float = 1e-4
    Tf: float = 10.0
    log_stride: float = 0.01
    ideal_servo: bool = True
    servo_wn: float = 200.0
    servo_zeta: float = 1.0
    diagonal_inertia: bool = True
    theta_mode: str = "zero"
    theta_limits: MotionLimits = field(default_factory=MotionLimits)
    yaw_guidance: bool = True
    tilt_heading: str = "desired"
    compensator: bool = True
    filter_tau: float = 1e-3
    out_dir: str = "out"
    sizing: SizingSettings = field(default_factory=SizingSettings)
    base_dir: str = "."

    def gains(self) -> GainSet:
        """Preset gains with overrides and the chosen robust offsets."""
        values = {}
        if self.preset is not None:
            values = dataclasses.asdict(PRESETS[self.preset])
        values.update(dict(self.gain_overrides))
        if self.theta_mode == "zero":
            values["theta1"] = values["theta2"] = 0.0
        elif self.theta_mode == "bounds":
            values["theta1"], values["theta2"] = theta_bounds(self.params, self.theta_limits)
        missing = [k for k in ("k1", "k2", "k3", "k4", "k5", "k6", "epsilon1") if k not in values]
        if missing:
            raise ConfigError(f"no preset and missing gains {missing}", field="gains")
        try:
            return GainSet(**values)
        except ValueError as exc:
            raise ConfigError(str(exc), field="gains") from exc

    def sim_config(self) -> SimConfig:
        opts = ControlOptions(
            Ts=self.Ts,
            compensator=self.compensator,
            filter_tau=self.filter_tau,
            yaw_guidance=self.yaw_guidance,
            tilt_heading=self.tilt_heading,
        )
        return SimConfig(
            Ts=self.Ts,
            Tf=self.Tf,
            model=self.model,
            params=self.params,
            ideal_servo=self.ideal_servo,
            servo_wn=self.servo_wn,
            servo_zeta=self.servo_zeta,
            diagonal_inertia=self.diagonal_inertia,
            log_stride=self.log_stride,
            control=opts,
        )

    def reference(self):
        if self.scenario == "linear":
            return linear_reference
        if self.scenario == "complex":
            return complex_reference
        if self.scenario == "hover":
            return hover_reference(self.hover_point)
        path = Path(self.scenario[len("csv:"):])
        if not path.is_absolute():
            path = Path(self.base_dir) / path
        return load_trajectory_csv(path)

    def to_text(self) -> str:
        """Serialize to config text that parses back to an equal object."""
        p = self.params
        lines = ["[vehicle]"]
        for k in ("M", "m", "L", "g", "gamma1", "gamma2", "m_b"):
            lines.append(f"{k} = {_fmt(getattr(p, k))}")
        lines += ["", "[gains]", f"preset = {self.preset if self.preset else 'none'}"]
        for k, v in self.gain_overrides:
            lines.append(f"{k} = {_fmt(v)}")
        lines += ["", "[scenario]", f"type = {self.scenario}"]
        lines.append("hover_point = " + ", ".join(_fmt(v) for v in self.hover_point))
        lines += [
            "",
            "[simulation]",
            f"model = {self.model}",
            f"Ts = {_fmt(self.Ts)}",
            f"Tf = {_fmt(self.Tf)}",
            f"log_stride = {_fmt(self.log_stride)}",
            f"ideal_servo = {_fmt_bool(self.ideal_servo)}",
            f"servo_wn = {_fmt(self.servo_wn)}",
            f"servo_zeta = {_fmt(self.servo_zeta)}",
            f"diagonal_inertia = {_fmt_bool(self.diagonal_inertia)}",
            f"theta_mode = {self.theta_mode}",
            f"yaw_guidance = {_fmt_bool(self.yaw_guidance)}",
            f"tilt_heading = {self.tilt_heading}",
            f"compensator = {_fmt_bool(self.compensator)}",
            f"filter_tau = {_fmt(self.filter_tau)}",
            "",
            "[theta_limits]",
        ]
        for f in dataclasses.fields(MotionLimits):
            lines.append(f"{f.name} = {_fmt(getattr(self.theta_limits, f.name))}")
        lines += ["", "[output]", f"dir = {self.out_dir}", "", "[sizing]"]
        s = self.sizing
        lines.append("betas = " + ", ".join(_fmt(v) for v in s.betas))
        lines.append("Ls = " + ", ".join(_fmt(v) for v in s.Ls))
        lines.append(f"amplitude = {'' if s.amplitude is None else _fmt(s.amplitude)}")
        lines.append(f"period = {_fmt(s.period)}")
        lines.append(f"Tf = {'' if s.Tf is None else _fmt(s.Tf)}")
        lines.append(f"dt = {_fmt(s.dt)}")
        lines.append("traces = " + "; ".join(f"{_fmt(b)}:{_fmt(L)}" for b, L in s.traces))
        return "\n".join(lines) + "\n"


def _fmt(v) -> str:
    return repr(float(v))


def _fmt_bool(v) -> str:
    return "true" if v else "false"


_SCHEMA = {
    "vehicle": {"M", "m", "L", "g", "gamma1", "gamma2", "m_b"},
    "gains": {"preset", *GAIN_KEYS},
    "scenario": {"type", "hover_point"},
    "simulation": {
        "model", "Ts", "Tf", "log_stride", "ideal_servo", "servo_wn", "servo_zeta",
        "diagonal_inertia", "theta_mode", "yaw_guidance", "tilt_heading", "compensator",
        "filter_tau",
    },
    "theta_limits": {f.name for f in dataclasses.fields(MotionLimits)},
    "output": {"dir"},
    "sizing": {"betas", "Ls", "amplitude", "period", "Tf", "dt", "traces"},
}

_KEY_RE = re.compile(r"^\s*([^\s=:#;\[][^=:]*?)\s*[=:]")
_SECTION_RE = re.compile(r"^\s*\[([^\]]+)\]")


def _line_index(text: str) -> dict:
    """Map (section, key) and (section, None) to 1-based line numbers."""
    index = {}
    section = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        m = _SECTION_RE.match(line)
        if m:
            section = m.group(1).strip()
            index.setdefault((section, None), lineno)
            continue
        m = _KEY_RE.match(line)
        if m and section is not None:
            index.setdefault((section, m.group(1).strip()), lineno)
    return index


class _Reader:
    def __init__(self, cp, index):
        self.cp = cp
        self.index = index

    def err(self, section, key, msg):
        return ConfigError(msg, field=f"{section}.{key}", line=self.index.get((section, key)))

    def raw(self, section, key):
        if self.cp.has_section(section) and self.cp.has_option(section, key):
            return self.cp.get(section, key).strip()
        return None

    def float(self, section, key, default, positive=False, allow_empty=False):
        raw = self.raw(section, key)
        if raw is None:
            return default
        if raw == "" and allow_empty:
            return None
        try:
            v = float(raw)
        except ValueError:
            raise self.err(section, key, f"expected a number, got {raw!r}") from None
        if not math.isfinite(v):
            raise self.err(section, key, f"expected a finite number, got {raw!r}")
        if positive and not v > 0:
            raise self.err(section, key, f"must be positive, got {raw}")
        return v

    def bool(self, section, key, default):
        raw = self.raw(section, key)
        if raw is None:
            return default
        low = raw.lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise self.err(section, key, f"expected true/false, got {raw!r}")

    def choice(self, section, key, default, options):
        raw = self.raw(section, key)
        if raw is None:
            return default
        if raw not in options:
            raise self.err(section, key, f"must be one of {list(options)}, got {raw!r}")
        return raw

    def floats(self, section, key, default, sep=","):
        raw = self.raw(section, key)
        if raw is None:
            return default
        try:
            return tuple(float(x) for x in raw.split(sep) if x.strip())
        except ValueError:
            raise self.err(section, key, f"expected a {sep!r}-separated list of numbers") from None


def parse_config(text: str, source: str | None = None) -> RunConfig:
    """Parse and validate config text.

    Raises:
        ConfigError: with the offending field and line when possible.
    """
    cp = configparser.ConfigParser(
        interpolation=None, inline_comment_prefixes=("#", ";"), default_section="__none__"
    )
    cp.optionxform = str
    try:
        cp.read_string(text, source=source or "<config>")
    except configparser.Error as exc:
        line = getattr(exc, "lineno", None)
        raise ConfigError(f"malformed config: {exc}", line=line) from None
    index = _line_index(text)
    for section in cp.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"unknown section [{section}]", field=section, line=index.get((section, None)))
        for key in cp.options(section):
            if key not in _SCHEMA[section]:
                raise ConfigError(
                    f"unknown key {key!r}", field=f"{section}.{key}", line=index.get((section, key))
                )
    r = _Reader(cp, index)
    base = RunConfig()

    dp = DesignParams()
    vehicle = {}
    for k in ("M", "m", "L", "g", "gamma1", "gamma2"):
        vehicle[k] = r.float("vehicle", k, getattr(dp, k), positive=True)
    m_b = r.float("vehicle", "m_b", None, positive=True)
    if m_b is not None:
        vehicle["m_b"] = m_b
    try:
        params = DesignParams(**vehicle)
    except ValueError as exc:
        raise ConfigError(str(exc), field="vehicle", line=index.get(("vehicle", None))) from None

    preset = r.raw("gains", "preset")
    if preset is None:
        preset = base.preset
    elif preset.lower() == "none":
        preset = None
    elif preset not in PRESETS:
        raise r.err("gains", "preset", f"unknown preset {preset!r}; choose from {sorted(PRESETS)}")
    overrides = []
    for k in GAIN_KEYS:
        v = r.float("gains", k, None)
        if v is not None:
            overrides.append((k, v))

    scenario = r.raw("scenario", "type")
    if scenario is None:
        scenario = base.scenario
    elif scenario not in SCENARIOS and not (scenario.startswith("csv:") and len(scenario) > 4):
        raise r.err("scenario", "type", f"must be linear, complex, hover or csv:<path>, got {scenario!r}")
    hover_point = r.floats("scenario", "hover_point", base.hover_point)
    if len(hover_point) != 3:
        raise r.err("scenario", "hover_point", "needs exactly three coordinates")

    sim = dict(
        model=r.choice("simulation", "model", base.model, MODELS),
        Ts=r.float("simulation", "Ts", base.Ts),
        Tf=r.float("simulation", "Tf", base.Tf),
        log_stride=r.float("simulation", "log_stride", base.log_stride, positive=True),
        ideal_servo=r.bool("simulation", "ideal_servo", base.ideal_servo),
        servo_wn=r.float("simulation", "servo_wn", base.servo_wn, positive=True),
        servo_zeta=r.float("simulation", "servo_zeta", base.servo_zeta, positive=True),
        diagonal_inertia=r.bool("simulation", "diagonal_inertia", base.diagonal_inertia),
        theta_mode=r.choice("simulation", "theta_mode", base.theta_mode, THETA_MODES),
        yaw_guidance=r.bool("simulation", "yaw_guidance", base.yaw_guidance),
        tilt_heading=r.choice("simulation", "tilt_heading", base.tilt_heading, ("desired", "measured")),
        compensator=r.bool("simulation", "compensator", base.compensator),
        filter_tau=r.float("simulation", "filter_tau", base.filter_tau, positive=True),
    )
    if not 0 < sim["Ts"] <= 0.01:
        raise r.err("simulation", "Ts", f"Ts must satisfy 0 < Ts <= 0.01, got {sim['Ts']}")
    if not sim["Tf"] > sim["Ts"]:
        raise r.err("simulation", "Tf", f"Tf must exceed Ts, got {sim['Tf']}")

    limits = {}
    for f in dataclasses.fields(MotionLimits):
        v = r.float("theta_limits", f.name, getattr(base.theta_limits, f.name))
        if v < 0:
            raise r.err("theta_limits", f.name, "must be non-negative")
        limits[f.name] = v

    out_dir = r.raw("output", "dir") or base.out_dir

    sz = base.sizing
    traces_raw = r.raw("sizing", "traces")
    traces = sz.traces
    if traces_raw is not None:
        try:
            traces = tuple(
                tuple(float(x) for x in item.split(":"))
                for item in traces_raw.split(";")
                if item.strip()
            )
        except ValueError:
            raise r.err("sizing", "traces", "expected 'beta:L; beta:L' pairs") from None
        if any(len(pair) != 2 for pair in traces):
            raise r.err("sizing", "traces", "expected 'beta:L; beta:L' pairs")
    sizing = SizingSettings(
        betas=r.floats("sizing", "betas", sz.betas),
        Ls=r.floats("sizing", "Ls", sz.Ls),
        amplitude=r.float("sizing", "amplitude", sz.amplitude, allow_empty=True),
        period=r.float("sizing", "period", sz.period, positive=True),
        Tf=r.float("sizing", "Tf", sz.Tf, positive=True, allow_empty=True),
        dt=r.float("sizing", "dt", sz.dt, positive=True),
        traces=traces,
    )
    for key, grid in (("betas", sizing.betas), ("Ls", sizing.Ls)):
        if not grid or any(b <= a for a, b in zip(grid, grid[1:])):
            raise r.err("sizing", key, "grid must be non-empty and strictly increasing")
    if any(not 0 < b < 0.25 for b in sizing.betas):
        raise r.err("sizing", "betas", "every beta must lie in (0, 0.25)")
    if any(L <= 0 for L in sizing.Ls):
        raise r.err("sizing", "Ls", "every L must be positive")

    base_dir = str(Path(source).resolve().parent) if source else "."
    cfg = RunConfig(
        params=params,
        preset=preset,
        gain_overrides=tuple(overrides),
        scenario=scenario,
        hover_point=hover_point,
        theta_limits=MotionLimits(**limits),
        out_dir=out_dir,
        sizing=sizing,
        base_dir=base_dir,
        **sim,
    )
    cfg.gains()  # surface gain errors at parse time
    return cfg


def preset_path(name: str) -> Path:
    """Path of a bundled preset config (``linear``, ``complex``, ``hover``, ``sizing``)."""
    stem = name[:-4] if name.endswith(".cfg") else name
    return Path(str(resources.files("swashmass") / "presets" / f"{stem}.cfg"))


def resolve_config_path(path_or_name: str) -> Path:
    """A filesystem path if it exists, else a bundled preset of that name."""
    p = Path(path_or_name)
    if p.exists():
        return p
    bundled = preset_path(p.name)
    if bundled.exists():
        return bundled
    raise ConfigError(f"config {path_or_name!r} not found (no file and no bundled preset)")


def load_config(path_or_name: str) -> RunConfig:
    path = resolve_config_path(path_or_name)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    return parse_config(text, source=str(path))

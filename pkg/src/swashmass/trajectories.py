"""Reference trajectories with analytic first and second derivatives.

A reference is any callable ``t -> ReferenceSample``.
"""

from __future__ import annotations

import csv
import math
from typing import Callable, NamedTuple

import numpy as np
from scipy.interpolate import CubicSpline

from .core_math import Vec3
from .errors import MalformedTable

LINEAR_RATE = 0.857  # m/s climb and lateral rate of the straight-line scenario


class ReferenceSample(NamedTuple):
    pos: Vec3
    vel: Vec3
    acc: Vec3


Reference = Callable[[float], ReferenceSample]

_ZERO = Vec3(0.0, 0.0, 0.0)


def linear_reference(t: float) -> ReferenceSample:
    """Straight diagonal climb y* = z* = 0.857 t."""
    r = LINEAR_RATE
    return ReferenceSample(Vec3(0.0, r * t, r * t), Vec3(0.0, r, r), _ZERO)


def complex_reference(t: float) -> ReferenceSample:
    """Aggressive manoeuvre y* = 4 sin(t/2), z* = 5 sin(t)."""
    s_half, c_half = math.sin(0.5 * t), math.cos(0.5 * t)
    s, c = math.sin(t), math.cos(t)
    return ReferenceSample(
        Vec3(0.0, 4.0 * s_half, 5.0 * s),
        Vec3(0.0, 2.0 * c_half, 5.0 * c),
        Vec3(0.0, -s_half, -5.0 * s),
    )


def hover_reference(point=(0.0, 0.0, 0.0)) -> Reference:
    """Constant set-point."""
    sample = ReferenceSample(Vec3(*map(float, point)), _ZERO, _ZERO)

    def ref(t: float) -> ReferenceSample:
        return sample

    return ref


def sampled_reference(table) -> Reference:
    """Cubic-spline reference through a table of ``(t, (x, y, z))`` rows.

    Outside the table range the nearest endpoint position is held with zero
    velocity and acceleration.

    Raises:
        MalformedTable: fewer than 4 rows, non-increasing times, or bad shape.
    """
    try:
        times = np.array([float(row[0]) for row in table])
        pos = np.array([[float(v) for v in row[1]] for row in table])
    except (TypeError, ValueError, IndexError) as exc:
        raise MalformedTable(f"cannot read table: {exc}") from exc
    if len(times) < 4:
        raise MalformedTable(f"need at least 4 rows, got {len(times)}")
    if pos.shape != (len(times), 3):
        raise MalformedTable("each row needs a 3-component position")
    if not np.all(np.isfinite(times)) or not np.all(np.isfinite(pos)):
        raise MalformedTable("table contains non-finite values")
    if not np.all(np.diff(times) > 0):
        raise MalformedTable("times must be strictly increasing")

    spline = CubicSpline(times, pos, axis=0)
    d1 = spline.derivative(1)
    d2 = spline.derivative(2)
    t0, t1 = float(times[0]), float(times[-1])
    first = ReferenceSample(Vec3(*map(float, pos[0])), _ZERO, _ZERO)
    last = ReferenceSample(Vec3(*map(float, pos[-1])), _ZERO, _ZERO)

    def ref(t: float) -> ReferenceSample:
        if t < t0:
            return first
        if t > t1:
            return last
        return ReferenceSample(
            Vec3(*map(float, spline(t))),
            Vec3(*map(float, d1(t))),
            Vec3(*map(float, d2(t))),
        )

    return ref


def load_trajectory_csv(path) -> Reference:
    """Read a ``t,x,y,z`` CSV file into a spline reference."""
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != ["t", "x", "y", "z"]:
            raise MalformedTable(f"{path}: header must be t,x,y,z")
        for lineno, rec in enumerate(reader, start=2):
            try:
                rows.append((float(rec["t"]), (float(rec["x"]), float(rec["y"]), float(rec["z"]))))
            except (TypeError, ValueError) as exc:
                raise MalformedTable(f"{path}:{lineno}: {exc}") from exc
    return sampled_reference(rows)

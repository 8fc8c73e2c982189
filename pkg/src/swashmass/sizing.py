"""Open-loop pitch response of the planar vehicle for sizing studies.

The swash pair follows a triangle wave while thrust is pinned at hover,
``T1 = M g / cos(phi)``.  With that thrust the pitch equation becomes

    Ixx(ell) phi_ddot + Ixx_dot phi_dot = beta M g ell

and the peak |phi| over the run measures how strongly a design tilts.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import Diverged
from .sim import rk4_step
from .vehicle import DesignParams, _axis_inertia, _axis_inertia_rate


def triangle_input(t: float, amplitude: float, period: float) -> float:
    """Zero-mean triangle wave: 0 at t=0, rising, peak ``amplitude`` at period/4."""
    if not period > 0:
        raise ValueError("period must be positive")
    ph = (t / period) % 1.0
    if ph < 0.25:
        return 4.0 * amplitude * ph
    if ph < 0.75:
        return amplitude * (2.0 - 4.0 * ph)
    return amplitude * (4.0 * ph - 4.0)


def triangle_rate(t: float, amplitude: float, period: float) -> float:
    """Slope of :func:`triangle_input` (right-continuous at the corners)."""
    ph = (t / period) % 1.0
    slope = 4.0 * amplitude / period
    return -slope if 0.25 <= ph < 0.75 else slope


@dataclass(frozen=True)
class PitchResponse:
    t: np.ndarray = field(repr=False)
    ell: np.ndarray = field(repr=False)
    phi: np.ndarray = field(repr=False)
    phi_max: float = 0.0


def pitch_response(
    params: DesignParams,
    amplitude: float | None = None,
    period: float = 4.0,
    Tf: float | None = None,
    dt: float = 1e-3,
    divergence_limit: float = 1e6,
) -> PitchResponse:
    """Integrate the hover-pinned pitch dynamics under a triangle swash input.

    Args:
        params: Vehicle constants.
        amplitude: Triangle amplitude [m]; defaults to the full stroke L.
        period: Triangle period [s].
        Tf: Duration [s]; defaults to one period.
        dt: RK4 step [s].

    Raises:
        Diverged: if |phi| or |phi_dot| leaves the bounded region.
    """
    A = params.L if amplitude is None else amplitude
    if abs(A) > params.L + 1e-12:
        raise ValueError(f"amplitude {A} exceeds the stroke L={params.L}")
    Tf = period if Tf is None else Tf
    n = int(round(Tf / dt))
    bmg = params.beta * params.M * params.g

    def f(x, ell_dot):
        t, phi, w = x
        ell = triangle_input(t, A, period)
        wd = (bmg * ell - _axis_inertia_rate(params, ell, ell_dot) * w) / _axis_inertia(params, ell)
        return (1.0, w, wd)

    x = (0.0, 0.0, 0.0)
    ts = np.empty(n + 1)
    phis = np.empty(n + 1)
    ells = np.empty(n + 1)
    ts[0], phis[0], ells[0] = 0.0, 0.0, 0.0
    for k in range(1, n + 1):
        # the slope of the step's own segment; a stage landing on a corner
        # must not see the next segment's slope
        slope = triangle_rate((k - 0.5) * dt, A, period)
        x = rk4_step(lambda v: f(v, slope), x, dt)
        t = k * dt
        x = (t, x[1], x[2])
        if not (abs(x[1]) <= divergence_limit and abs(x[2]) <= divergence_limit):
            raise Diverged(f"pitch response diverged at t={t:.6g}", t)
        ts[k], phis[k], ells[k] = t, x[1], triangle_input(t, A, period)
    return PitchResponse(ts, ells, phis, float(np.max(np.abs(phis))))


@dataclass(frozen=True)
class SizingSweep:
    """Peak pitch over a (beta, L) grid; ``phi_max[i, j]`` is at (betas[i], Ls[j])."""

    betas: np.ndarray
    Ls: np.ndarray
    phi_max: np.ndarray
    traces: dict = field(default_factory=dict, repr=False)

    def monotone_in_beta(self) -> bool:
        """phi_max non-decreasing along beta for every L."""
        return bool(np.all(np.diff(self.phi_max, axis=0) >= 0))

    def monotone_in_L(self) -> bool:
        """phi_max non-decreasing along L for every beta."""
        return bool(np.all(np.diff(self.phi_max, axis=1) >= 0))

    def csv_text(self) -> str:
        buf = io.StringIO()
        buf.write("beta,L,phi_max_deg\n")
        for i, b in enumerate(self.betas):
            for j, L in enumerate(self.Ls):
                buf.write(f"{b:.12g},{L:.12g},{math.degrees(self.phi_max[i, j]):.12g}\n")
        return buf.getvalue()


def phi_max_surface(
    betas,
    Ls,
    amplitude: float | None = None,
    period: float = 4.0,
    Tf: float | None = None,
    dt: float = 1e-3,
    M: float = 1.1,
    g: float = 9.81,
    keep_traces=(),
) -> SizingSweep:
    """Peak pitch for every (beta, L) cell at fixed total mass ``M``.

    Args:
        amplitude: Triangle amplitude [m]; None uses each cell's L.
        keep_traces: (beta, L) pairs whose full responses are stored.
    """
    betas = np.asarray(betas, dtype=float)
    Ls = np.asarray(Ls, dtype=float)
    for name, grid in (("beta", betas), ("L", Ls)):
        if grid.ndim != 1 or len(grid) == 0 or np.any(np.diff(grid) <= 0):
            raise ValueError(f"{name} grid must be non-empty and strictly increasing")
    if np.any(betas <= 0) or np.any(betas >= 0.25):
        raise ValueError("beta grid must lie in (0, 0.25)")
    wanted = {(float(b), float(L)) for b, L in keep_traces}
    surface = np.empty((len(betas), len(Ls)))
    traces = {}
    for i, b in enumerate(betas):
        for j, L in enumerate(Ls):
            params = DesignParams.from_beta(float(b), float(L), M=M, g=g)
            resp = pitch_response(params, amplitude, period, Tf, dt)
            surface[i, j] = resp.phi_max
            if (float(b), float(L)) in wanted:
                traces[(float(b), float(L))] = resp
    return SizingSweep(betas, Ls, surface, traces)

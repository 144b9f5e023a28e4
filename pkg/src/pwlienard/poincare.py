"""Half-return maps on the switching line and crossing-cycle location.

The right map sends an entry ordinate y0 <= 0 to the exit ordinate of the
arc through the right half plane; the left map mirrors it.  Both maps are
evaluated with the closed-form affine flight when the side is linear and
with the event-detecting integrator otherwise.  Fixed points of the
composition are crossing periodic orbits.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np
from matplotlib.path import Path as _PolyPath
from scipy.optimize import brentq

from . import flow
from .linearflow import FlightResult, affine_flight, side_matrix
from .model import CycleRecord, LienardSpec, SideFuncs, equilibrium_census

__all__ = [
    "HalfMapResult",
    "BelowThreshold",
    "NotFocus",
    "half_map_right",
    "half_map_left",
    "left_threshold",
    "parametric_half_map",
    "full_return",
    "find_crossing_cycles",
    "cycle_csv",
]


class BelowThreshold(ValueError):
    """Left entry ordinate below the least returning ordinate."""

    def __init__(self, z_hat: float):
        super().__init__(f"left map undefined below z0 = {z_hat:g}")
        self.z_hat = z_hat


class NotFocus(ValueError):
    pass


@dataclass(frozen=True)
class HalfMapResult:
    y: float
    time: float
    arc: Union[FlightResult, list[flow.OrbitSegment], None] = None


def _method_for(side: SideFuncs, method: str) -> str:
    if method == "auto":
        return "exact" if side.affine is not None else "rk"
    return method


def _exact_half(side: SideFuncs, y0: float, t_cap: float) -> Optional[HalfMapResult]:
    t, d, a = side.affine
    A, b = side_matrix(t, d, a)
    fr = affine_flight(A, b, y0, t_cap=t_cap)
    if fr is None:
        return None
    return HalfMapResult(y=fr.y_exit, time=fr.time, arc=fr)


def _rk_half(
    sys: LienardSpec, right: bool, y0: float, t_cap: float
) -> Optional[HalfMapResult]:
    segments = flow.integrate(sys, (0.0, y0), t_cap=t_cap, max_crossings=1)
    seg = segments[0]
    if seg.right is not right or seg.event is not flow.EventKind.SWITCH_CROSSING:
        return None
    # seg.t0 is the microstep duration off the switching line, part of the arc
    return HalfMapResult(y=seg.event_y, time=seg.t1, arc=segments)


def half_map_right(
    sys: LienardSpec, y0: float, method: str = "auto", t_cap: float = 1e4
) -> Optional[HalfMapResult]:
    """Exit ordinate and flight time of the right arc through (0, y0).

    Requires y0 <= 0 (the arc enters x > 0).  Returns None when the orbit
    never returns to the switching line.
    """
    if y0 > 0:
        raise ValueError("right map needs an entry ordinate y0 <= 0")
    if _method_for(sys.plus, method) == "exact":
        return _exact_half(sys.plus, y0, t_cap)
    return _rk_half(sys, True, y0, t_cap)


def half_map_left(
    sys: LienardSpec, z0: float, method: str = "auto", t_cap: float = 1e4
) -> Optional[HalfMapResult]:
    """Exit ordinate and flight time of the left arc through (0, z0).

    Requires z0 >= 0.  Raises BelowThreshold when the entry ordinate lies
    under the least returning ordinate (the orbit is captured on the left);
    returns None for other non-returning orbits.
    """
    if z0 < 0:
        raise ValueError("left map needs an entry ordinate z0 >= 0")
    if _method_for(sys.minus, method) == "exact":
        res = _exact_half(sys.minus, z0, t_cap)
    else:
        res = _rk_half(sys, False, z0, t_cap)
    if res is None:
        z_hat = left_threshold(sys, method=method, t_cap=t_cap)
        if z_hat is not None and z0 < z_hat:
            raise BelowThreshold(z_hat)
    return res


def left_threshold(
    sys: LienardSpec, method: str = "auto", t_cap: float = 1e4
) -> Optional[float]:
    """Least left entry ordinate whose arc returns to the switching line.

    The boundary orbit passes through the origin tangentially, so it is the
    backward-time left arc started there.  Returns 0.0 when every positive
    ordinate returns and None when the backward arc itself does not close.
    """
    if sys.minus.g(0.0) <= 0.0:
        # no visible left tangency: no capture pocket behind the origin
        return 0.0
    if _method_for(sys.minus, method) == "exact":
        t, d, a = sys.minus.affine
        A, b = side_matrix(t, d, a)
        try:
            fr = affine_flight(-A, -b, 0.0, t_cap=t_cap)
        except Exception:
            return None
        return fr.y_exit if fr is not None else None
    segments = flow.integrate(
        sys, (0.0, 0.0), direction="backward", t_cap=t_cap, max_crossings=1,
        first_side=False,
    )
    seg = segments[0]
    if seg.event is flow.EventKind.SWITCH_CROSSING:
        return seg.event_y
    return None


# ---------------------------------------------------------------------------
# Parametric closed forms for focus sides


def parametric_half_map(
    side: SideFuncs, T: float
) -> tuple[float, float]:
    """Entry and exit ordinates of the side's arc with flight time T.

    Closed form for a linear side of focus type: the arc from (0, y0)
    reaches x = 0 again after time T exactly when

        y0 = y_e - alpha x_e - omega x_e (cos omega T - e^(-alpha T)) / sin omega T

    with (x_e, y_e) the subsystem equilibrium, alpha half the trace and
    omega the rotation rate.  Raises NotFocus for real eigenvalues and
    ValueError at resonant times (sin omega T = 0).
    """
    if side.affine is None:
        raise NotFocus("parametric form needs a linear side")
    t, d, a = side.affine
    disc = 0.25 * t * t - d
    if disc >= 0.0:
        raise NotFocus("side eigenvalues are real")
    alpha = 0.5 * t
    omega = math.sqrt(-disc)
    x_e = a / d
    y_e = t * x_e
    s = math.sin(omega * T)
    if s == 0.0:
        raise ValueError("resonant flight time")
    y0 = y_e - alpha * x_e - omega * x_e * (math.cos(omega * T) - math.exp(-alpha * T)) / s
    u = y0 - y_e
    y1 = y_e + math.exp(alpha * T) * (
        math.cos(omega * T) * u + s / omega * (-d * x_e - alpha * u)
    )
    return y0, y1


# ---------------------------------------------------------------------------
# Full return map and cycle location


def full_return(
    sys: LienardSpec, y0: float, method: str = "auto", t_cap: float = 1e4
) -> Optional[tuple[HalfMapResult, HalfMapResult]]:
    """Right arc followed by left arc from (0, y0), y0 < 0.

    Returns the two half-map results or None when either leg fails
    (including left captures).
    """
    right = half_map_right(sys, y0, method=method, t_cap=t_cap)
    if right is None or right.y <= 0:
        return None
    try:
        left = half_map_left(sys, right.y, method=method, t_cap=t_cap)
    except BelowThreshold:
        return None
    if left is None:
        return None
    return right, left


def _displacement(sys: LienardSpec, method: str, t_cap: float) -> Callable[[float], Optional[float]]:
    def D(y0: float) -> Optional[float]:
        legs = full_return(sys, y0, method=method, t_cap=t_cap)
        if legs is None:
            return None
        return legs[1].y - y0

    return D


def _arc_polyline(res: HalfMapResult, t_offset: float, right: bool, n: int) -> np.ndarray:
    ts = np.linspace(0.0, res.time, n)
    if isinstance(res.arc, FlightResult):
        states = res.arc.states(ts)
    else:
        chunks = [seg.states for seg in res.arc]
        states = np.vstack(chunks)
        ts = np.concatenate([seg.ts for seg in res.arc]) - res.arc[0].ts[0]
    side_col = np.full(len(ts), 1.0 if right else -1.0)
    return np.column_stack([ts + t_offset, states, side_col])


def _build_cycle(
    sys: LienardSpec,
    y_star: float,
    method: str,
    t_cap: float,
    samples: int = 400,
) -> CycleRecord:
    right, left = full_return(sys, y_star, method=method, t_cap=t_cap)
    period = right.time + left.time
    poly_r = _arc_polyline(right, 0.0, True, samples)
    poly_l = _arc_polyline(left, right.time, False, samples)
    polyline = np.vstack([poly_r, poly_l])

    if sys.plus.affine is not None and sys.minus.affine is not None:
        lam = sys.plus.affine[0] * right.time + sys.minus.affine[0] * left.time
    else:
        fs_r = np.array([sys.plus.f(x) for x in poly_r[:, 1]])
        fs_l = np.array([sys.minus.f(x) for x in poly_l[:, 1]])
        lam = float(np.trapezoid(fs_r, poly_r[:, 0]) + np.trapezoid(fs_l, poly_l[:, 0]))

    h = max(1e-6, 1e-6 * abs(y_star))
    D = _displacement(sys, method, t_cap)
    dp, dm = D(y_star + h), D(y_star - h)
    if dp is not None and dm is not None:
        deriv = ((dp + y_star + h) - (dm + y_star - h)) / (2.0 * h)
    else:
        deriv = math.exp(lam)

    xmax = float(np.max(np.abs(polyline[:, 1]))) + 1.0
    census = equilibrium_census(sys, xmax=xmax)
    ring = _PolyPath(polyline[:, 1:3])
    enclosed = tuple(
        rec for rec in census if ring.contains_point(rec.location)
    )
    return CycleRecord(
        y_top=right.y,
        y_bottom=y_star,
        period=period,
        lambda_gamma=lam,
        map_derivative=deriv,
        enclosed=enclosed,
        polyline=polyline,
    )


def find_crossing_cycles(
    sys: LienardSpec,
    bracket_cap: float = 1e6,
    method: str = "auto",
    t_cap: float = 1e4,
) -> list[CycleRecord]:
    """Crossing periodic orbits located as fixed points of the return map.

    Scans entry ordinates y0 = -1e-3 * 2^k up to ``bracket_cap`` for sign
    changes of the displacement P(y0) - y0 and refines each bracket with
    Brent's method to a residual below 1e-10.
    """
    D = _displacement(sys, method, t_cap)
    cycles: list[CycleRecord] = []
    prev: Optional[tuple[float, float]] = None
    y = -1e-3
    while abs(y) <= bracket_cap:
        d = D(y)
        if d is None:
            prev = None
        else:
            if prev is not None and prev[1] * d < 0.0:
                y_star = float(
                    brentq(D, prev[0], y, xtol=1e-13, rtol=8.9e-16)
                )
                res = D(y_star)
                if res is not None and abs(res) <= 1e-10 * max(1.0, abs(y_star)):
                    cycles.append(_build_cycle(sys, y_star, method, t_cap))
            if prev is None or d != 0.0:
                prev = (y, d)
        y *= 2.0
    return cycles


def cycle_csv(cycle: CycleRecord, path) -> None:
    """Polyline CSV (t, x, y, side) preceded by a summary comment row."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            [
                "# y_top", f"{cycle.y_top:.12g}", "y_bottom", f"{cycle.y_bottom:.12g}",
                "period", f"{cycle.period:.12g}", "lambda", f"{cycle.lambda_gamma:.12g}",
                "map_derivative", f"{cycle.map_derivative:.12g}",
                "enclosed", str(cycle.enclosed_count),
            ]
        )
        writer.writerow(["t", "x", "y", "side"])
        for t, x, yv, s in cycle.polyline:
            writer.writerow(
                [f"{t:.12g}", f"{x:.12g}", f"{yv:.12g}", "right" if s > 0 else "left"]
            )

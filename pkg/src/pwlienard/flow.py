"""Event-detecting numerical integration of the piecewise system.

Orbits are integrated side by side with an adaptive Runge-Kutta 5(4) method;
hits of the switching line x = 0 are located on the dense output and the
integration continues with the other side's field per the crossing
convention.  Tangencies (hits with y ~ 0) are resolved through the fold
visibility of each side.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from .model import LienardSpec, SideFuncs

__all__ = [
    "EventKind",
    "OrbitSegment",
    "IntegrationError",
    "StepSizeUnderflow",
    "StartAtEquilibrium",
    "NotClosed",
    "integrate",
    "lambda_gamma",
    "trajectory_csv",
]

_EVENT_X_TOL = 1e-12
_TANGENT_Y_TOL = 1e-10
_NORM_CAP = 1e8


class IntegrationError(RuntimeError):
    pass


class StepSizeUnderflow(IntegrationError):
    pass


class StartAtEquilibrium(ValueError):
    pass


class NotClosed(ValueError):
    pass


class EventKind(enum.Enum):
    SWITCH_CROSSING = "switch-crossing"
    TANGENCY = "tangency"
    EQUILIBRIUM_APPROACH = "equilibrium-approach"
    BLOWUP = "blowup"
    TIME_CAP = "time-cap"


@dataclass(frozen=True)
class OrbitSegment:
    right: bool  # which half plane the arc lives in
    t0: float
    t1: float
    ts: np.ndarray
    states: np.ndarray  # shape (n, 2)
    event: EventKind
    event_y: Optional[float] = None

    @property
    def side_label(self) -> str:
        return "right" if self.right else "left"


def _rhs(side: SideFuncs):
    def rhs(t, z):
        return (side.F(z[0]) - z[1], side.g(z[0]))

    return rhs


def _entry_side(sys: LienardSpec, x: float, y: float, forward: bool = True) -> bool:
    """True for the right half plane."""
    if x > 0:
        return True
    if x < 0:
        return False
    if y != 0.0:
        # xdot = -y on the switching line; reversed time flips the side
        return (y < 0.0) == forward
    # tangency at the origin: a side whose fold is visible keeps the orbit
    gp0, gm0 = sys.plus.g(0.0), sys.minus.g(0.0)
    if gp0 < 0.0:
        return True
    if gm0 > 0.0:
        return False
    raise StartAtEquilibrium("origin is an equilibrium or both folds invisible")


def _taylor_microstep(side: SideFuncs, y0: float, forward: bool):
    """Analytic step off the switching line, accurate to third order."""
    sgn = 1.0 if forward else -1.0
    g0 = side.g(0.0)
    f0 = side.f(0.0)
    if y0 != 0.0:
        delta = min(1e-9 / abs(y0), 1e-6)
    else:
        if g0 == 0.0:
            raise StartAtEquilibrium("tangency with g(0)=0")
        delta = math.sqrt(2e-9 / abs(g0))
    xd = -y0 * sgn
    xdd = -f0 * y0 - g0  # second derivative of x along forward time
    x1 = xd * delta + 0.5 * xdd * sgn * delta * delta * sgn
    y1 = y0 + sgn * g0 * delta + 0.5 * side.gp(0.0) * (-y0) * delta * delta
    return delta, x1, y1


def integrate(
    sys: LienardSpec,
    start: Sequence[float],
    direction: str = "forward",
    t_cap: float = 200.0,
    max_crossings: int = 64,
    rtol: float = 1e-9,
    atol: float = 1e-12,
    samples_per_segment: int = 400,
    first_side: Optional[bool] = None,
) -> list[OrbitSegment]:
    """Orbit of the piecewise system through ``start``.

    Returns the list of one-sided arcs up to a terminal event (blowup, time
    cap, crossing budget) with switching-line crossings resolved by the
    crossing convention.  ``first_side`` overrides the side choice at a
    double tangency, where both half orbits leave the origin on their own
    side and the crossing convention alone cannot decide.
    """
    forward = direction == "forward"
    x, y = float(start[0]), float(start[1])
    segments: list[OrbitSegment] = []
    t_accum = 0.0
    for i in range(max_crossings):
        if i == 0 and first_side is not None:
            right = first_side
        else:
            right = _entry_side(sys, x, y, forward)
        side = sys.plus if right else sys.minus
        if i == 0 and x != 0.0 and math.hypot(side.F(x) - y, side.g(x)) < 1e-8:
            raise StartAtEquilibrium("start point is an equilibrium of the entered side")
        if abs(x) < 1e-13:
            dt, x, y = _taylor_microstep(side, y, forward)
            t_accum += dt
        seg = _one_side(
            side, right, x, y, t_accum, forward, t_cap - t_accum, rtol, atol,
            samples_per_segment,
        )
        segments.append(seg)
        t_accum = seg.t1
        if seg.event is not EventKind.SWITCH_CROSSING and seg.event is not EventKind.TANGENCY:
            break
        y = float(seg.event_y)
        x = 0.0
        if seg.event is EventKind.TANGENCY:
            # visibility decides whether the orbit re-enters the same side
            try:
                _entry_side(sys, 0.0, 0.0)
            except StartAtEquilibrium:
                break
    return segments


def _one_side(
    side: SideFuncs,
    right: bool,
    x0: float,
    y0: float,
    t0: float,
    forward: bool,
    t_budget: float,
    rtol: float,
    atol: float,
    n_samples: int,
) -> OrbitSegment:
    if t_budget <= 0:
        return OrbitSegment(
            right, t0, t0, np.array([t0]), np.array([[x0, y0]]), EventKind.TIME_CAP
        )
    base = _rhs(side)
    sgn = 1.0 if forward else -1.0

    def rhs(t, z):
        dz = base(t, z)
        return (sgn * dz[0], sgn * dz[1])

    def cross(t, z):
        return z[0]

    cross.terminal = True
    cross.direction = -1.0 if right else 1.0

    def blowup(t, z):
        return float(np.hypot(z[0], z[1])) - _NORM_CAP

    blowup.terminal = True

    sol = solve_ivp(
        rhs,
        (0.0, t_budget),
        (x0, y0),
        method="RK45",
        rtol=rtol,
        atol=atol,
        dense_output=True,
        events=[cross, blowup],
    )
    if sol.status == -1:
        # a finite-time escape steepens faster than the solver can step;
        # treat it as a blowup once the orbit is already far out
        if float(np.hypot(*sol.y[:, -1])) > 1e6:
            t_end = float(sol.t[-1])
            ts = np.linspace(0.0, t_end, n_samples)
            states = sol.sol(ts).T if t_end > 0 else np.array([[x0, y0]])
            return OrbitSegment(
                right, t0, t0 + t_end, ts + t0, states, EventKind.BLOWUP
            )
        raise StepSizeUnderflow(sol.message)
    t_end = float(sol.t[-1])
    if sol.t_events[0].size:
        t_end = float(sol.t_events[0][0])
        y_ev = float(sol.y_events[0][0][1])
        x_res = float(sol.y_events[0][0][0])
        if abs(x_res) > _EVENT_X_TOL:
            # polish the crossing on the dense output by bisection
            t_end, y_ev = _polish_event(sol.sol, t_end)
        event = (
            EventKind.TANGENCY if abs(y_ev) <= _TANGENT_Y_TOL else EventKind.SWITCH_CROSSING
        )
        event_y = y_ev
    elif sol.t_events[1].size:
        t_end = float(sol.t_events[1][0])
        event, event_y = EventKind.BLOWUP, None
    else:
        speed = np.hypot(*base(t_end, sol.y[:, -1]))
        event = EventKind.EQUILIBRIUM_APPROACH if speed < 1e-8 else EventKind.TIME_CAP
        event_y = None

    ts = np.linspace(0.0, t_end, n_samples)
    states = sol.sol(ts).T if t_end > 0 else np.array([[x0, y0]])
    if event in (EventKind.SWITCH_CROSSING, EventKind.TANGENCY):
        states[-1, 0] = 0.0
        states[-1, 1] = event_y
    return OrbitSegment(right, t0, t0 + t_end, ts + t0, states, event, event_y)


def _polish_event(dense, t_hint: float) -> tuple[float, float]:
    lo, hi = t_hint - 1e-6, t_hint + 1e-6
    flo = dense(lo)[0]
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fm = dense(mid)[0]
        if flo * fm <= 0.0:
            hi = mid
        else:
            lo, flo = mid, fm
        if hi - lo < 1e-16 * (1.0 + abs(t_hint)):
            break
    t = 0.5 * (lo + hi)
    return t, float(dense(t)[1])


# ---------------------------------------------------------------------------
# Divergence integral along a closed crossing orbit


def lambda_gamma(sys: LienardSpec, segments: Sequence[OrbitSegment]) -> float:
    """Time integral of f over a closed crossing orbit.

    The divergence of each side's field is its f, so the sign of the result
    decides the hyperbolic stability of the orbit.
    """
    first = segments[0].states[0]
    last = segments[-1].states[-1]
    if float(np.hypot(*(first - last))) > 1e-6:
        raise NotClosed(f"orbit endpoints differ by {np.hypot(*(first - last)):g}")
    total = 0.0
    for seg in segments:
        side = sys.plus if seg.right else sys.minus
        aff = side.affine
        if aff is not None:
            total += aff[0] * (seg.t1 - seg.t0)
        else:
            fs = np.array([side.f(x) for x in seg.states[:, 0]])
            total += float(np.trapezoid(fs, seg.ts))
    return total


def trajectory_csv(segments: Sequence[OrbitSegment], path) -> None:
    """Write the sampled orbit as CSV with columns t, x, y, side."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "x", "y", "side"])
        for seg in segments:
            for t, (x, y) in zip(seg.ts, seg.states):
                writer.writerow([f"{t:.12g}", f"{x:.12g}", f"{y:.12g}", seg.side_label])

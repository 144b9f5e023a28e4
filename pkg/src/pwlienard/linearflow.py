"""Closed-form flights of planar affine subsystems z' = A z + b.

Used as the fast path of the half-return maps when a subsystem is linear.
The planar matrix exponential is written as
exp(A tau) = e^(alpha tau) [C(tau) I + S(tau) (A - alpha I)], alpha = tr A / 2,
with (C, S) = (cos, sin/w), (cosh, sinh/beta) or (1, tau) depending on the
sign of the discriminant.  First crossings of the switching line x = 0 are
located by partitioning time at the analytic extrema of x(tau), where x is
strictly monotone, and running Brent's method inside the bracketing piece.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import brentq

__all__ = ["FlightResult", "StartsAtEquilibrium", "affine_flight", "side_matrix"]

_MAX_KNOTS = 100_000


class StartsAtEquilibrium(ValueError):
    pass


@dataclass(frozen=True)
class FlightResult:
    """One arc from (0, y0) back to the switching line."""

    time: float
    y_exit: float
    A: np.ndarray
    b: np.ndarray
    y_entry: float

    def states(self, ts: np.ndarray) -> np.ndarray:
        """Vectorized (x, y) samples along the arc, shape (len(ts), 2)."""
        return _states(self.A, self.b, np.array([0.0, self.y_entry]), np.asarray(ts))


def side_matrix(t: float, d: float, a: float) -> tuple[np.ndarray, np.ndarray]:
    """Canonical Lienard side as (A, b): x' = t x - y, y' = d x - a."""
    return np.array([[t, -1.0], [d, 0.0]]), np.array([0.0, -a])


def _split(A: np.ndarray):
    alpha = 0.5 * float(np.trace(A))
    disc = alpha * alpha - float(np.linalg.det(A))
    return alpha, disc


def _states(A: np.ndarray, b: np.ndarray, z0: np.ndarray, ts: np.ndarray) -> np.ndarray:
    ze = np.linalg.solve(A, -b)
    u0 = z0 - ze
    alpha, disc = _split(A)
    B = A - alpha * np.eye(2)
    ts = np.atleast_1d(ts).astype(float)
    if disc < 0.0:
        w = math.sqrt(-disc)
        C = np.cos(w * ts)
        S = np.sin(w * ts) / w
    elif disc > 0.0:
        beta = math.sqrt(disc)
        C = np.cosh(beta * ts)
        S = np.sinh(beta * ts) / beta
    else:
        C = np.ones_like(ts)
        S = ts
    Bu = B @ u0
    states = np.exp(alpha * ts)[:, None] * (np.outer(C, u0) + np.outer(S, Bu))
    return states + ze


def affine_flight(
    A: np.ndarray,
    b: np.ndarray,
    y0: float,
    t_cap: float = 1e4,
) -> Optional[FlightResult]:
    """First return of the orbit through (0, y0) to the line x = 0.

    Returns None when the orbit never crosses back (capture by an
    equilibrium, escape to infinity, or no crossing before ``t_cap``).
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    ze = np.linalg.solve(A, -b)
    xe, ye = float(ze[0]), float(ze[1])
    u0 = np.array([-xe, y0 - ye])
    if float(np.hypot(*u0)) < 1e-14:
        raise StartsAtEquilibrium("flight starts at the subsystem equilibrium")
    alpha, disc = _split(A)
    P = -xe
    Q = float((A[0, 0] - alpha) * u0[0] + A[0, 1] * u0[1])

    if disc < 0.0:
        tau = _first_root_focus(alpha, math.sqrt(-disc), P, Q, xe, t_cap)
    else:
        tau = _first_root_real(alpha, disc, P, Q, xe, t_cap)
    if tau is None:
        return None
    y_exit = float(_states(A, b, np.array([0.0, y0]), np.array([tau]))[0, 1])
    return FlightResult(time=tau, y_exit=y_exit, A=A, b=b, y_entry=float(y0))


def _x_focus(tau, alpha, w, P, Q, xe):
    return xe + math.exp(alpha * tau) * (P * math.cos(w * tau) + (Q / w) * math.sin(w * tau))


def _first_root_focus(alpha, w, P, Q, xe, t_cap) -> Optional[float]:
    R = math.hypot(P, Q / w)
    if R == 0.0:
        return None
    phi = math.atan2(Q / w, P)
    # extrema of x(tau): w*tau - phi = atan(alpha/w) + k*pi
    theta0 = math.atan2(alpha, w)

    def knot(k: int) -> float:
        return (phi + theta0 + k * math.pi) / w

    k = 0
    while knot(k) <= 1e-12:
        k += 1
    # decaying spiral around an off-line equilibrium stops crossing once the
    # oscillation amplitude falls below |xe|
    if alpha < 0.0 and xe != 0.0:
        if R <= abs(xe):
            return None
        t_stop = math.log(abs(xe) / R) / alpha + math.pi / w
    else:
        t_stop = t_cap

    def f(tau):
        return _x_focus(tau, alpha, w, P, Q, xe)

    t_lo = 1e-12
    v_lo = f(t_lo)
    for j in range(k, k + _MAX_KNOTS):
        t_hi = knot(j)
        if t_hi > min(t_stop, t_cap) + math.pi / w:
            return None
        v_hi = f(t_hi)
        if v_lo == 0.0:
            t_lo, v_lo = t_hi, v_hi
            continue
        if v_hi == 0.0 or v_lo * v_hi < 0.0:
            if v_hi == 0.0:
                # tangential touch: only a crossing if the next piece flips sign
                t_next = knot(j + 1)
                if f(t_next) * v_lo >= 0.0:
                    t_lo, v_lo = t_next, f(t_next)
                    continue
                return t_hi
            return float(brentq(f, t_lo, t_hi, xtol=1e-14, rtol=8.9e-16))
        t_lo, v_lo = t_hi, v_hi
    return None


def _first_root_real(alpha, disc, P, Q, xe, t_cap) -> Optional[float]:
    """Real or repeated eigenvalues: x(tau) - xe has at most one interior
    extremum, so at most one genuine crossing beyond tau = 0."""
    if disc > 0.0:
        beta = math.sqrt(disc)
        l1, l2 = alpha + beta, alpha - beta
        c1 = 0.5 * (P + Q / beta)
        c2 = 0.5 * (P - Q / beta)

        def f(tau):
            return xe + c1 * math.exp(min(l1 * tau, 700.0)) + c2 * math.exp(
                min(l2 * tau, 700.0)
            )

        tau_m = None
        if c1 * l1 != 0.0 and c2 * l2 != 0.0:
            ratio = -(c2 * l2) / (c1 * l1)
            if ratio > 0.0:
                tau_m = math.log(ratio) / (2.0 * beta)
        # asymptotic sign of f as tau -> inf: the largest growing mode wins
        lim = xe
        for lam, c in ((l1, c1), (l2, c2)):
            if c != 0.0 and lam > 0.0:
                lim = math.copysign(math.inf, c)
                break
            if lam == 0.0:
                lim += c
    else:
        c1, c2 = P, Q

        def f(tau):
            return xe + (c1 + c2 * tau) * math.exp(min(alpha * tau, 700.0))

        tau_m = None
        if alpha * c2 != 0.0:
            cand = -(c2 + alpha * c1) / (alpha * c2)
            if cand > 0.0:
                tau_m = cand
        if alpha > 0.0:
            lead = c2 if c2 != 0.0 else c1
            lim = math.copysign(math.inf, lead) if lead != 0.0 else xe
        elif alpha < 0.0:
            lim = xe
        else:
            lim = math.copysign(math.inf, c2) if c2 != 0.0 else xe + c1

    if tau_m is None or tau_m <= 1e-12:
        return None  # monotone beyond the start: never crosses back
    v_m = f(tau_m)
    if v_m == 0.0:
        return None  # tangential touch, no sign change
    if lim == 0.0 or (v_m > 0.0) == (lim > 0.0):
        return None
    hi = tau_m + 1.0
    while f(hi) * v_m > 0.0:
        hi = tau_m + 2.0 * (hi - tau_m)
        if hi > t_cap:
            return None
    return float(brentq(f, tau_m, hi, xtol=1e-14, rtol=8.9e-16))

"""Hypothesis checks H1-H5, the p-coordinate machinery and the
necessary-condition equations for crossing periodic orbits.

The change of variable p = F(x) maps both half planes onto p >= 0 with
strictly monotone inverse branches x+(p), x-(p).  The ratio
phi(p) = g(x(p))/f(x(p)) per side drives everything: its small-p limits are
the H3 constants, the roots of Lambda(p) = phi+(p) - phi-(p) give the
abscissas every crossing cycle must traverse, and the derivative comparison
K- < K+ is the H5 uniqueness test.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.optimize import brentq

from .model import LienardSpec, SideFuncs

__all__ = [
    "NonConvergent",
    "PCoord",
    "H1Result",
    "HResult",
    "StarSolution",
    "HypothesisReport",
    "check_h1",
    "check_h2",
    "eta_limits",
    "solve_star",
    "check_h4",
    "check_h5",
    "lambda_fn",
    "lambda_identically_zero",
    "hypothesis_report",
    "default_pmax",
]


class NonConvergent(RuntimeError):
    """The H3 limit did not stabilize along the sampling sequence."""


# ---------------------------------------------------------------------------
# p-coordinate


class PCoord:
    """Forward map p(x) and its inverse branches x+(p), x-(p).

    Instances memoize nothing beyond the underlying antiderivatives, so they
    are safe for concurrent use.
    """

    def __init__(self, sys: LienardSpec, xmax: float = 100.0):
        self.sys = sys
        self.xmax = float(xmax)
        self.pplus = float(sys.plus.F(self.xmax))
        self.pminus = float(sys.minus.F(-self.xmax))

    def p(self, x: float) -> float:
        return float(self.sys.plus.F(x) if x >= 0 else self.sys.minus.F(x))

    def xplus(self, p: float) -> float:
        aff = self.sys.plus.affine
        if aff is not None:
            return p / aff[0]
        return self._invert(self.sys.plus.F, p, right=True)

    def xminus(self, p: float) -> float:
        aff = self.sys.minus.affine
        if aff is not None:
            return p / aff[0]
        return self._invert(self.sys.minus.F, p, right=False)

    def _invert(self, F: Callable[[float], float], p: float, right: bool) -> float:
        if p == 0.0:
            return 0.0
        if p < 0.0:
            raise ValueError("p must be nonnegative")
        sgn = 1.0 if right else -1.0
        hi = 1e-3
        while F(sgn * hi) < p:
            hi *= 2.0
            if hi > 4.0 * self.xmax:
                raise ValueError(f"p={p:g} outside the invertible range")
        return sgn * brentq(lambda s: F(sgn * s) - p, 0.0, hi, xtol=1e-13, rtol=8.9e-16)

    def phi_plus(self, p: float) -> float:
        aff = self.sys.plus.affine
        if aff is not None:
            t, d, a = aff
            return d * p / (t * t) - a / t
        x = self.xplus(p)
        return self.sys.plus.g(x) / self.sys.plus.f(x)

    def phi_minus(self, p: float) -> float:
        aff = self.sys.minus.affine
        if aff is not None:
            t, d, a = aff
            return d * p / (t * t) - a / t
        x = self.xminus(p)
        return self.sys.minus.g(x) / self.sys.minus.f(x)

    def Lambda(self, p: float) -> float:
        return self.phi_plus(p) - self.phi_minus(p)

    def K_plus(self, x: float) -> float:
        return _K(self.sys.plus, x)

    def K_minus(self, x: float) -> float:
        return _K(self.sys.minus, x)


def _K(side: SideFuncs, x: float) -> float:
    if side.affine is not None:
        t, d, _a = side.affine
        return d / (t * t)
    f = side.f(x)
    return (side.gp(x) * f - side.fp(x) * side.g(x)) / f**3


def default_pmax(sys: LienardSpec, xmax: float = 100.0) -> float:
    """min(p+, p-) over the configured window; the inverse branches only
    exist on [0, p+-)."""
    pc = PCoord(sys, xmax)
    return min(pc.pplus, pc.pminus)


# ---------------------------------------------------------------------------
# H1 / H2


@dataclass(frozen=True)
class H1Result:
    holds: bool
    x_e: Optional[float] = None


@dataclass(frozen=True)
class HResult:
    checked: bool
    holds: bool
    margin: Optional[float] = None


_H_GRID = 4096


def check_h1(sys: LienardSpec, xmax: float = 100.0) -> H1Result:
    """Single-crossing sign condition on g+ over (0, xmax].

    Holds when g+ is positive on all of (0, xmax] (then x_e = 0) or has a
    single sign change from negative to positive at x_e > 0.
    """
    xs = np.linspace(xmax / _H_GRID, xmax, _H_GRID)
    vals = np.array([sys.plus.g(x) for x in xs])
    signs = np.sign(vals)
    changes = np.nonzero(signs[:-1] * signs[1:] < 0)[0]
    if len(changes) == 0:
        if np.all(vals > 0):
            return H1Result(True, 0.0)
        return H1Result(False)
    if len(changes) > 1:
        return H1Result(False)
    i = int(changes[0])
    if not (vals[i] < 0 < vals[i + 1]):
        return H1Result(False)
    x_e = brentq(sys.plus.g, xs[i], xs[i + 1], xtol=1e-12, rtol=8.9e-16)
    return H1Result(True, float(x_e))


def check_h2(sys: LienardSpec, xmax: float = 100.0) -> bool:
    """Strict signs f+ > 0 on (0, xmax] and f- < 0 on [-xmax, 0)."""
    xs = np.linspace(xmax / _H_GRID, xmax, _H_GRID)
    if any(sys.plus.f(x) <= 0 for x in xs):
        return False
    if any(sys.minus.f(-x) >= 0 for x in xs):
        return False
    return True


# ---------------------------------------------------------------------------
# H3 limits


def eta_limits(sys: LienardSpec, xmax: float = 100.0) -> tuple[float, float]:
    """The limits of g/f along x+-(p) as p -> 0+ (Aitken-accelerated)."""
    aff_p, aff_m = sys.plus.affine, sys.minus.affine
    if aff_p is not None and aff_m is not None:
        return (-aff_p[2] / aff_p[0], -aff_m[2] / aff_m[0])
    pc = PCoord(sys, xmax)
    return (_eta_one(pc.phi_plus), _eta_one(pc.phi_minus))


def _eta_one(phi: Callable[[float], float]) -> float:
    vals = [phi(10.0**-k) for k in range(2, 11)]
    # Aitken delta-squared on the tail when it is not already flat
    v0, v1, v2 = vals[-3], vals[-2], vals[-1]
    denom = v2 - 2.0 * v1 + v0
    est = v2 if abs(denom) < 1e-14 else v2 - (v2 - v1) ** 2 / denom
    if abs(vals[-1] - vals[-2]) > 1e-6 * (1.0 + abs(est)) and abs(
        est - vals[-1]
    ) > 1e-6 * (1.0 + abs(est)):
        raise NonConvergent(f"tail {vals[-3:]} not converging")
    return float(est)


# ---------------------------------------------------------------------------
# Star solutions (necessary-condition equations)


@dataclass(frozen=True)
class StarSolution:
    x_minus: float
    x_plus: float
    p: float


def lambda_fn(sys: LienardSpec, xmax: float = 100.0) -> Callable[[float], float]:
    """The callable p -> phi+(p) - phi-(p)."""
    return PCoord(sys, xmax).Lambda


def solve_star(
    sys: LienardSpec, pmax: Optional[float] = None, xmax: float = 100.0
) -> list[StarSolution]:
    """All simultaneous solutions of F-(x-) = F+(x+), g-/f- = g+/f+.

    They are the roots of Lambda on (0, pmax].  For canonical linear systems
    Lambda is linear in p and the unique candidate root is closed form;
    otherwise a sign scan plus Brent refinement is used.
    """
    c = sys.canonical
    if c is not None:
        if pmax is None:
            pmax = xmax * min(c.tR, -c.tL)
        slope = c.dR / c.tR**2 - c.dL / c.tL**2
        icpt = c.aR / c.tR - c.aL / c.tL
        if slope == 0.0:
            return []  # no isolated root; Lambda == const (annulus when 0)
        p = icpt / slope
        if p <= 0.0 or p > pmax:
            return []
        return [StarSolution(x_minus=p / c.tL, x_plus=p / c.tR, p=p)]

    pc = PCoord(sys, xmax)
    if pmax is None:
        pmax = min(pc.pplus, pc.pminus)
    n = 2048
    # linear grid over the bulk plus a geometric prefix toward p = 0 so
    # roots below the first linear node are not skipped
    ps = np.concatenate(
        [np.geomspace(pmax * 1e-9, pmax / n, 64), np.linspace(pmax / n, pmax, n)]
    )
    vals = np.array([pc.Lambda(p) for p in ps])
    out: list[StarSolution] = []
    for i in np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]:
        p = brentq(pc.Lambda, ps[i], ps[i + 1], xtol=1e-13, rtol=8.9e-16)
        out.append(StarSolution(x_minus=pc.xminus(p), x_plus=pc.xplus(p), p=float(p)))
    return out


def lambda_identically_zero(
    sys: LienardSpec, pmax: Optional[float] = None, xmax: float = 100.0, tol: float = 1e-8
) -> bool:
    """Numeric test for phi+ == phi- on (0, pmax] (sup norm <= tol)."""
    pc = PCoord(sys, xmax)
    if pmax is None:
        pmax = min(pc.pplus, pc.pminus)
    ps = np.linspace(pmax / 256, pmax, 256)
    return all(abs(pc.Lambda(p)) <= tol for p in ps)


# ---------------------------------------------------------------------------
# H4 / H5


def check_h4(sys: LienardSpec, xstar: float, xmax: float = 100.0) -> HResult:
    """Monotonicity of F+ f+ / g+ beyond the star abscissa.

    Requires xstar >= x_e; refuses (checked=False) when g+ vanishes inside
    (xstar, xmax].
    """
    xs = np.linspace(xstar + (xmax - xstar) / _H_GRID, xmax, _H_GRID)
    gs = np.array([sys.plus.g(x) for x in xs])
    if np.any(gs == 0.0) or np.any(np.sign(gs[:-1]) != np.sign(gs[1:])):
        return HResult(checked=False, holds=False)
    h1 = check_h1(sys, xmax)
    if not h1.holds or xstar < (h1.x_e or 0.0):
        return HResult(checked=True, holds=False)
    w = np.array([sys.plus.F(x) * sys.plus.f(x) for x in xs]) / gs
    diffs = np.diff(w)
    return HResult(checked=True, holds=bool(np.all(diffs > -1e-12)), margin=float(diffs.min()))


def check_h5(
    sys: LienardSpec,
    pstar: float,
    pmax: Optional[float] = None,
    xmax: float = 100.0,
    grid: int = 256,
) -> HResult:
    """K-(x-(p2)) < K+(x+(p1)) for all p2 > p1 >= pstar.

    For canonical linear systems both K are constants and the test is the
    comparison dL/tL^2 < dR/tR^2.
    """
    c = sys.canonical
    if c is not None:
        margin = c.dR / c.tR**2 - c.dL / c.tL**2
        return HResult(checked=True, holds=margin > 0.0, margin=margin)
    pc = PCoord(sys, xmax)
    if pmax is None:
        pmax = min(pc.pplus, pc.pminus)
    if pstar >= pmax:
        return HResult(checked=False, holds=False)
    ps = np.linspace(pstar, pmax, grid)
    k_plus = np.array([pc.K_plus(pc.xplus(p)) for p in ps])
    k_minus = np.array([pc.K_minus(pc.xminus(p)) for p in ps])
    prefix_min = np.minimum.accumulate(k_plus)
    # for each p2 (index j >= 1) compare against the smallest K+ at p1 <= p2
    margins = prefix_min[:-1] - k_minus[1:]
    return HResult(checked=True, holds=bool(np.all(margins > 0.0)), margin=float(margins.min()))


# ---------------------------------------------------------------------------
# Combined report


@dataclass(frozen=True)
class HypothesisReport:
    h1: H1Result
    h2: bool
    h3_holds: bool
    eta_plus: Optional[float]
    eta_minus: Optional[float]
    h4: Optional[HResult]
    h5: Optional[HResult]
    star_solutions: tuple[StarSolution, ...]
    unique_star: bool
    lambda_zero: bool
    xmax: float
    pmax: float
    notes: tuple[str, ...] = field(default_factory=tuple)


def hypothesis_report(
    sys: LienardSpec, xmax: float = 100.0, pmax: Optional[float] = None
) -> HypothesisReport:
    """Evaluate H1-H3, solve the star equations, then H4/H5 if applicable."""
    notes: list[str] = []
    h1 = check_h1(sys, xmax)
    h2 = check_h2(sys, xmax)
    if pmax is None:
        pmax = default_pmax(sys, xmax)

    eta_p = eta_m = None
    h3 = False
    if h2:
        try:
            eta_p, eta_m = eta_limits(sys, xmax)
            h3 = math.isfinite(eta_p) and math.isfinite(eta_m) and eta_p <= eta_m
            if h3 and eta_p == eta_m:
                # equality sub-case: phi+ < phi- required for small p
                pc = PCoord(sys, xmax)
                small = [10.0**-k for k in range(2, 7)]
                h3 = all(pc.Lambda(p) < 0.0 for p in small)
                notes.append("h3 equality sub-case checked on p in [1e-6, 1e-2]")
        except NonConvergent:
            notes.append("h3 limits did not converge")
            h3 = False

    stars: tuple[StarSolution, ...] = ()
    lambda_zero = False
    if h2:
        stars = tuple(solve_star(sys, pmax=pmax, xmax=xmax))
        lambda_zero = lambda_identically_zero(sys, pmax=pmax, xmax=xmax)
    unique = len(stars) == 1 and not lambda_zero

    h4 = h5 = None
    if unique:
        h4 = check_h4(sys, stars[0].x_plus, xmax)
        h5 = check_h5(sys, sys.plus.F(stars[0].x_plus), pmax=pmax, xmax=xmax)
    notes.append(f"star scan certified on (0, {pmax:g}] only")
    return HypothesisReport(
        h1=h1,
        h2=h2,
        h3_holds=h3,
        eta_plus=eta_p,
        eta_minus=eta_m,
        h4=h4,
        h5=h5,
        star_solutions=stars,
        unique_star=unique,
        lambda_zero=lambda_zero,
        xmax=xmax,
        pmax=float(pmax),
        notes=tuple(notes),
    )

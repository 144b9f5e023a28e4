"""Reduction of general piecewise-linear systems to Lienard canonical form
and sliding-set detection on the switching line."""

from __future__ import annotations

import math
from typing import Optional

import numpy as np

from .model import CanonicalParams, LienardSpec, PwlSpec

__all__ = [
    "CoefficientSignError",
    "SlidingPresent",
    "sliding_set",
    "canonicalize",
    "as_lienard",
    "pwl_from_canonical",
    "demo_system",
]

_INF = math.inf


class CoefficientSignError(ValueError):
    """a12+ * a12- <= 0: no crossing limit cycles, reduction undefined."""


class SlidingPresent(ValueError):
    """The system has a nonempty sliding set (b != 0)."""

    def __init__(self, b: float, intervals=None):
        self.b = b
        self.intervals = intervals
        detail = f" (b={b:g})" if b is not None else ""
        super().__init__("sliding set present" + detail)


def sliding_set(p: PwlSpec) -> list[tuple[float, float]]:
    """y-intervals on the switching line where orbits cannot simply cross.

    The sliding set is {y : (a12+ y + b1+)(a12- y + b1-) < 0}.  The result
    is a list of open intervals (possibly unbounded); an empty list means no
    sliding.
    """
    ap, bp = float(p.Aplus[0, 1]), float(p.bplus[0])
    am, bm = float(p.Aminus[0, 1]), float(p.bminus[0])

    if ap == 0.0 and am == 0.0:
        return [(-_INF, _INF)] if bp * bm < 0.0 else []
    if ap == 0.0 or am == 0.0:
        # constant factor times an affine one: a half line when nonzero
        const = bp if ap == 0.0 else bm
        slope, icpt = (am, bm) if ap == 0.0 else (ap, bp)
        if const == 0.0:
            return []
        root = -icpt / slope
        if const * slope < 0.0:
            return [(root, _INF)]
        return [(-_INF, root)]
    r1, r2 = -bp / ap, -bm / am
    lo, hi = min(r1, r2), max(r1, r2)
    # coincident roots give a square factor; width maps back to the
    # canonical offset b, so reuse its float-zero scale
    if (hi - lo) * abs(am) <= 1e-12 * (1.0 + abs(bp) + abs(bm)):
        lo = hi
    if ap * am > 0.0:
        return [] if lo == hi else [(lo, hi)]
    # negative leading coefficient: negative outside the roots
    return [(-_INF, lo), (hi, _INF)]


def canonicalize(p: PwlSpec) -> CanonicalParams:
    """Canonical parameters (traces, determinants, offsets) of ``p``.

    Requires a12+ a12- > 0; otherwise the x-component of both fields has the
    same sign on the crossing sets and no crossing limit cycle can exist,
    which callers should report as a verdict instead.
    """
    ap = float(p.Aplus[0, 1])
    am = float(p.Aminus[0, 1])
    if ap * am <= 0.0:
        raise CoefficientSignError(f"a12+ a12- = {ap * am:g} <= 0")
    b1p, b2p = float(p.bplus[0]), float(p.bplus[1])
    b1m, b2m = float(p.bminus[0]), float(p.bminus[1])
    ratio = am / ap
    return CanonicalParams(
        tR=float(np.trace(p.Aplus)),
        tL=float(np.trace(p.Aminus)),
        dR=float(p.Aplus[0, 0] * p.Aplus[1, 1] - p.Aplus[0, 1] * p.Aplus[1, 0]),
        dL=float(p.Aminus[0, 0] * p.Aminus[1, 1] - p.Aminus[0, 1] * p.Aminus[1, 0]),
        b=ratio * b1p - b1m,
        aL=am * b2m - float(p.Aminus[1, 1]) * b1m,
        aR=ratio * (ap * b2p - float(p.Aplus[1, 1]) * b1p),
    )


def b_is_zero(c: CanonicalParams, p: Optional[PwlSpec] = None) -> bool:
    """Float-safe test for an empty sliding set in canonical parameters."""
    scale = 1.0
    if p is not None:
        scale += float(np.linalg.norm(p.bplus)) + float(np.linalg.norm(p.bminus))
    else:
        scale += abs(c.aR) + abs(c.aL)
    return abs(c.b) <= 1e-12 * scale


def as_lienard(c: CanonicalParams) -> LienardSpec:
    """Closed-form Lienard system of canonical parameters with b = 0.

    The identification is f+ = tR, g+ = dR x - aR, f- = tL, g- = dL x - aL.
    """
    if not b_is_zero(c):
        raise SlidingPresent(c.b)
    return LienardSpec.linear(tR=c.tR, dR=c.dR, aR=c.aR, tL=c.tL, dL=c.dL, aL=c.aL)


def pwl_from_canonical(c: CanonicalParams) -> PwlSpec:
    """The canonical-form system itself as a PwlSpec (useful for tests)."""
    return PwlSpec(
        Aplus=np.array([[c.tR, -1.0], [c.dR, 0.0]]),
        bplus=np.array([c.b, -c.aR]),
        Aminus=np.array([[c.tL, -1.0], [c.dL, 0.0]]),
        bminus=np.array([0.0, -c.aL]),
    )


def demo_system(chi: float) -> PwlSpec:
    """The built-in showcase system with left offset proportional to chi.

    For chi = 1, 0 and a small negative value the system has exactly one
    crossing limit cycle enclosing 1, 2 and 3 equilibria respectively.
    """
    return PwlSpec(
        Aplus=np.array([[2.0, -1.0], [2.0, 0.0]]),
        bplus=np.array([0.0, -2.0]),
        Aminus=np.array([[-4.0, -1.0], [5.0, 0.0]]),
        bminus=np.array([0.0, -5.0 * chi]),
    )

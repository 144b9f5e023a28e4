"""Domain types shared by all analysis modules.

All types are immutable after construction and all operations here are pure.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional, Sequence

import numpy as np

from . import exprlang
from .exprlang import Antiderivative, as_affine, differentiate, evaluate, fold, parse

__all__ = [
    "DegenerateSystem",
    "SideFuncs",
    "LienardSpec",
    "PwlSpec",
    "CanonicalParams",
    "SwitchKind",
    "SwitchPointClass",
    "EquilibriumKind",
    "EquilibriumRecord",
    "CycleRecord",
    "VerdictKind",
    "Verdict",
    "classify_switch_point",
    "equilibrium_census",
    "virtual_equilibria",
]

_DET_TOL = 1e-12


class DegenerateSystem(ValueError):
    """A subsystem matrix is singular (|det| below tolerance)."""


# ---------------------------------------------------------------------------
# One side (right or left) of a nonsmooth Lienard system


@dataclass(frozen=True)
class SideFuncs:
    """Scalar functions of one half-plane subsystem.

    ``f`` and ``g`` are the damping and restoring functions, ``fp``/``gp``
    their derivatives and ``F`` the antiderivative of ``f`` with F(0)=0.
    ``affine`` holds ``(t, d, a)`` when f == t (constant) and g == d*x - a,
    which unlocks closed-form paths everywhere downstream.
    """

    f: Callable[[float], float]
    g: Callable[[float], float]
    fp: Callable[[float], float]
    gp: Callable[[float], float]
    F: Callable[[float], float]
    affine: Optional[tuple[float, float, float]] = None

    @staticmethod
    def from_expressions(
        f_src: str, g_src: str, params: Mapping[str, float] | None = None
    ) -> "SideFuncs":
        params = dict(params or {})
        fe, ge = parse(f_src), parse(g_src)
        fpe, gpe = fold(differentiate(fe)), fold(differentiate(ge))

        def f(x, _e=fe):
            return evaluate(_e, x, params)

        def g(x, _e=ge):
            return evaluate(_e, x, params)

        def fp(x, _e=fpe):
            return evaluate(_e, x, params)

        def gp(x, _e=gpe):
            return evaluate(_e, x, params)

        f_aff = as_affine(fe, params)
        g_aff = as_affine(ge, params)
        affine = None
        if f_aff is not None and g_aff is not None and f_aff[0] == 0.0:
            affine = (f_aff[1], g_aff[0], -g_aff[1])
        if f_aff is not None:
            a, b = f_aff

            def F(x, _a=a, _b=b):
                return 0.5 * _a * x * x + _b * x

        else:
            F = Antiderivative(f)
        return SideFuncs(f=f, g=g, fp=fp, gp=gp, F=F, affine=affine)

    @staticmethod
    def linear(t: float, d: float, a: float) -> "SideFuncs":
        """Canonical-form side: f = t, g = d*x - a, F = t*x."""
        return SideFuncs(
            f=lambda x: t,
            g=lambda x: d * x - a,
            fp=lambda x: 0.0,
            gp=lambda x: d,
            F=lambda x: t * x,
            affine=(t, d, a),
        )


@dataclass(frozen=True)
class CanonicalParams:
    """Lienard canonical form parameters of a piecewise-linear system."""

    tR: float
    tL: float
    dR: float
    dL: float
    aR: float
    aL: float
    b: float = 0.0


@dataclass(frozen=True)
class LienardSpec:
    """The four scalar functions defining a nonsmooth Lienard system."""

    plus: SideFuncs
    minus: SideFuncs
    params: Mapping[str, float] = field(default_factory=dict)

    @staticmethod
    def from_expressions(
        fplus: str,
        fminus: str,
        gplus: str,
        gminus: str,
        params: Mapping[str, float] | None = None,
    ) -> "LienardSpec":
        params = dict(params or {})
        return LienardSpec(
            plus=SideFuncs.from_expressions(fplus, gplus, params),
            minus=SideFuncs.from_expressions(fminus, gminus, params),
            params=params,
        )

    @staticmethod
    def linear(
        tR: float, dR: float, aR: float, tL: float, dL: float, aL: float
    ) -> "LienardSpec":
        return LienardSpec(
            plus=SideFuncs.linear(tR, dR, aR), minus=SideFuncs.linear(tL, dL, aL)
        )

    def side(self, right: bool) -> SideFuncs:
        return self.plus if right else self.minus

    @property
    def canonical(self) -> Optional[CanonicalParams]:
        """Canonical parameters when both sides are in canonical linear form."""
        if self.plus.affine is None or self.minus.affine is None:
            return None
        tR, dR, aR = self.plus.affine
        tL, dL, aL = self.minus.affine
        return CanonicalParams(tR=tR, tL=tL, dR=dR, dL=dL, aR=aR, aL=aL, b=0.0)


# ---------------------------------------------------------------------------
# General piecewise-linear system


@dataclass(frozen=True)
class PwlSpec:
    """General planar piecewise-linear system z' = A z + b on each side."""

    Aplus: np.ndarray
    bplus: np.ndarray
    Aminus: np.ndarray
    bminus: np.ndarray

    def __post_init__(self):
        Ap = np.asarray(self.Aplus, dtype=float).reshape(2, 2)
        Am = np.asarray(self.Aminus, dtype=float).reshape(2, 2)
        bp = np.asarray(self.bplus, dtype=float).reshape(2)
        bm = np.asarray(self.bminus, dtype=float).reshape(2)
        object.__setattr__(self, "Aplus", Ap)
        object.__setattr__(self, "Aminus", Am)
        object.__setattr__(self, "bplus", bp)
        object.__setattr__(self, "bminus", bm)
        for name, A in (("right", Ap), ("left", Am)):
            if abs(float(np.linalg.det(A))) <= _DET_TOL:
                raise DegenerateSystem(f"{name} matrix is singular")


# ---------------------------------------------------------------------------
# Switching-line point classification


class SwitchKind(enum.Enum):
    CROSSING_UP = "crossing-up"
    CROSSING_DOWN = "crossing-down"
    BOUNDARY_EQUILIBRIUM = "boundary-equilibrium"
    PSEUDO_EQUILIBRIUM = "pseudo-equilibrium"
    FOLD_FOLD_REGULAR = "fold-fold-regular"


@dataclass(frozen=True)
class SwitchPointClass:
    kind: SwitchKind
    # tangency visibility per side; set only for fold-fold points
    visible_right: Optional[bool] = None
    visible_left: Optional[bool] = None


def classify_switch_point(sys: LienardSpec, y: float) -> SwitchPointClass:
    """Classify the point (0, y) on the switching line.

    For y != 0 the x-velocity is -y from both sides, so the point is a
    crossing point.  At the origin the product g+(0)g-(0) separates boundary
    equilibria, pseudo-equilibria and regular (parabolic fold-fold) points.
    """
    if y > 0:
        return SwitchPointClass(SwitchKind.CROSSING_DOWN)
    if y < 0:
        return SwitchPointClass(SwitchKind.CROSSING_UP)
    gp0 = sys.plus.g(0.0)
    gm0 = sys.minus.g(0.0)
    prod = gp0 * gm0
    if prod == 0.0:
        return SwitchPointClass(SwitchKind.BOUNDARY_EQUILIBRIUM)
    if prod < 0.0:
        return SwitchPointClass(SwitchKind.PSEUDO_EQUILIBRIUM)
    # regular fold-fold: right-side orbit is tangent from the right half
    # plane (visible for the right system) exactly when g+(0) < 0, the
    # left-side orbit is visible for the left system when g-(0) > 0
    return SwitchPointClass(
        SwitchKind.FOLD_FOLD_REGULAR,
        visible_right=gp0 < 0.0,
        visible_left=gm0 > 0.0,
    )


# ---------------------------------------------------------------------------
# Equilibria


class EquilibriumKind(enum.Enum):
    REGULAR_RIGHT = "regular-right"
    REGULAR_LEFT = "regular-left"
    BOUNDARY = "boundary"
    PSEUDO = "pseudo"


@dataclass(frozen=True)
class EquilibriumRecord:
    location: tuple[float, float]
    kind: EquilibriumKind
    linear_type: Optional[str] = None  # focus / node / saddle / center
    stable: Optional[bool] = None
    virtual: bool = False


def _linear_type(trace: float, det: float) -> tuple[str, Optional[bool]]:
    if det < 0:
        return "saddle", None
    if trace == 0.0 and det > 0:
        return "center", None
    kind = "focus" if trace * trace < 4.0 * det else "node"
    return kind, trace < 0


_SCAN_POINTS = 2048
_BISECT_TOL = 1e-12


def _scan_roots(g: Callable[[float], float], lo: float, hi: float) -> list[float]:
    """Sign-scan + bisection roots of g on (lo, hi)."""
    xs = np.linspace(lo, hi, _SCAN_POINTS)
    vals = np.array([g(x) for x in xs])
    roots = []
    for i in range(len(xs) - 1):
        a, b = vals[i], vals[i + 1]
        if a == 0.0:
            if xs[i] not in roots:
                roots.append(float(xs[i]))
            continue
        if a * b < 0.0:
            x0, x1 = xs[i], xs[i + 1]
            while x1 - x0 > _BISECT_TOL * (1.0 + abs(x0)):
                m = 0.5 * (x0 + x1)
                if g(x0) * g(m) <= 0.0:
                    x1 = m
                else:
                    x0 = m
            roots.append(0.5 * (x0 + x1))
    if len(vals) and vals[-1] == 0.0:
        roots.append(float(xs[-1]))
    return roots


def _side_equilibria(
    side: SideFuncs, lo: float, hi: float, right: bool, virtual: bool
) -> list[EquilibriumRecord]:
    records = []
    for x in _scan_roots(side.g, lo, hi):
        if abs(x) < 1e-12:
            continue
        kind, stable = _linear_type(side.f(x), side.gp(x))
        records.append(
            EquilibriumRecord(
                location=(x, side.F(x)),
                kind=EquilibriumKind.REGULAR_RIGHT if right else EquilibriumKind.REGULAR_LEFT,
                linear_type=kind,
                stable=stable,
                virtual=virtual,
            )
        )
    return records


def equilibrium_census(
    sys: LienardSpec, xmax: float = 100.0, xmin: Optional[float] = None
) -> list[EquilibriumRecord]:
    """All equilibria of the Filippov system in [xmin, xmax].

    Regular equilibria are zeros of g+/g- restricted to their own half
    plane; the origin is included when it is a boundary or pseudo
    equilibrium.  Equilibria of a subsystem lying in the wrong half plane
    are *virtual* and excluded here (see :func:`virtual_equilibria`).
    """
    if xmin is None:
        xmin = -xmax
    eps = 1e-9
    records = _side_equilibria(sys.plus, eps, xmax, right=True, virtual=False)
    records += _side_equilibria(sys.minus, xmin, -eps, right=False, virtual=False)
    origin = classify_switch_point(sys, 0.0)
    if origin.kind == SwitchKind.BOUNDARY_EQUILIBRIUM:
        records.append(EquilibriumRecord((0.0, 0.0), EquilibriumKind.BOUNDARY))
    elif origin.kind == SwitchKind.PSEUDO_EQUILIBRIUM:
        records.append(EquilibriumRecord((0.0, 0.0), EquilibriumKind.PSEUDO))
    return sorted(records, key=lambda r: r.location[0])


def virtual_equilibria(
    sys: LienardSpec, xmax: float = 100.0, xmin: Optional[float] = None
) -> list[EquilibriumRecord]:
    """Subsystem equilibria lying in the wrong half plane (not Filippov ones)."""
    if xmin is None:
        xmin = -xmax
    eps = 1e-9
    records = _side_equilibria(sys.plus, xmin, -eps, right=True, virtual=True)
    records += _side_equilibria(sys.minus, eps, xmax, right=False, virtual=True)
    return sorted(records, key=lambda r: r.location[0])


# ---------------------------------------------------------------------------
# Cycles and verdicts


@dataclass(frozen=True)
class CycleRecord:
    """A located crossing periodic orbit."""

    y_top: float  # crossing ordinate on the positive y-axis
    y_bottom: float  # crossing ordinate on the negative y-axis
    period: float
    lambda_gamma: float
    map_derivative: float
    enclosed: tuple[EquilibriumRecord, ...]
    polyline: np.ndarray  # columns t, x, y, side(+1/-1)

    @property
    def enclosed_count(self) -> int:
        return len(self.enclosed)


class VerdictKind(enum.Enum):
    NO_CROSSING_CYCLES = "no-crossing-cycles"
    AT_MOST_ONE_STABLE = "at-most-one-stable"
    AT_MOST_ONE_UNSTABLE = "at-most-one-unstable"
    AT_MOST_ONE = "at-most-one"  # bound without stability information
    ANNULUS = "annulus"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class Verdict:
    kind: VerdictKind
    reason: str
    evidence: tuple[tuple[str, object], ...] = ()

    def __post_init__(self):
        if not self.evidence:
            object.__setattr__(self, "evidence", ((self.reason, None),))

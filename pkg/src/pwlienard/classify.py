"""Theorem-backed verdicts for piecewise-linear and Lienard systems.

The piecewise-linear classifier walks a closed decision tree over the
canonical coefficients: a trace-sign lemma, the stable/unstable/annulus
trichotomy when the half traces straddle zero with positive determinants,
and otherwise a reduction through symmetry changes to a continuous or
monodromic normal form.  The Lienard classifier runs the hypothesis
checks and combines them with the uniqueness and annulus criteria.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from . import poincare
from .canonical import SlidingPresent, as_lienard, canonicalize, sliding_set
from .canonical import CoefficientSignError
from .hypotheses import HypothesisReport, hypothesis_report
from .model import (
    CanonicalParams,
    CycleRecord,
    DegenerateSystem,
    LienardSpec,
    PwlSpec,
    Verdict,
    VerdictKind,
)

__all__ = ["verdict_pwl", "verdict_lienard", "FullReport", "full_report"]

_MAX_REDUCTIONS = 4


def verdict_pwl(c: CanonicalParams, _depth: int = 0) -> Verdict:
    """Crossing-limit-cycle verdict for the canonical piecewise-linear form.

    Requires b = 0 (no sliding) and nonzero half determinants.
    """
    if c.dR * c.dL == 0.0:
        raise DegenerateSystem("classification needs dR*dL != 0")
    if c.b != 0.0:
        raise SlidingPresent(c.b, [])
    if _depth > _MAX_REDUCTIONS:
        return Verdict(VerdictKind.INCONCLUSIVE, "reduction depth exceeded")

    if c.tL * c.tR >= 0.0:
        reason = (
            "equal-sign half traces admit no crossing limit cycles"
            if c.tL != 0.0 or c.tR != 0.0
            else "zero half traces give centers or weak saddles on both sides"
        )
        return Verdict(
            VerdictKind.NO_CROSSING_CYCLES, reason, (("trace-lemma", (c.tL, c.tR)),)
        )

    if c.tR < 0.0 < c.tL:
        # time reversal (y, t) -> (-y, -t) restores tL < 0 < tR and swaps
        # the stability of any cycle
        rev = CanonicalParams(
            tR=-c.tR, tL=-c.tL, dR=c.dR, dL=c.dL, aR=c.aR, aL=c.aL, b=0.0
        )
        inner = verdict_pwl(rev, _depth + 1)
        swapped = {
            VerdictKind.AT_MOST_ONE_STABLE: VerdictKind.AT_MOST_ONE_UNSTABLE,
            VerdictKind.AT_MOST_ONE_UNSTABLE: VerdictKind.AT_MOST_ONE_STABLE,
        }.get(inner.kind, inner.kind)
        return Verdict(
            swapped,
            inner.reason + " (after time reversal)",
            inner.evidence + (("time-reversal", None),),
        )

    # from here tL < 0 < tR
    if c.dL > 0.0 and c.dR > 0.0:
        return _trichotomy(c)
    return _reduce_cases(c, _depth)


def _trichotomy(c: CanonicalParams) -> Verdict:
    r, l = c.aR / c.tR, c.aL / c.tL
    kR, kL = c.dR / (c.tR * c.tR), c.dL / (c.tL * c.tL)
    ev = (("aR/tR", r), ("aL/tL", l), ("dR/tR^2", kR), ("dL/tL^2", kL))
    if r > l:
        if kR > kL:
            return Verdict(
                VerdictKind.AT_MOST_ONE_STABLE,
                "any crossing periodic orbit is unique and stable",
                ev,
            )
        return Verdict(
            VerdictKind.NO_CROSSING_CYCLES,
            "necessary condition dR/tR^2 > dL/tL^2 fails",
            ev,
        )
    if r < l:
        if kR < kL:
            return Verdict(
                VerdictKind.AT_MOST_ONE_UNSTABLE,
                "any crossing periodic orbit is unique and unstable",
                ev,
            )
        return Verdict(
            VerdictKind.NO_CROSSING_CYCLES,
            "necessary condition dR/tR^2 < dL/tL^2 fails",
            ev,
        )
    if kR == kL:
        return Verdict(
            VerdictKind.ANNULUS,
            "any crossing periodic orbit lies in a periodic annulus",
            ev,
        )
    return Verdict(
        VerdictKind.NO_CROSSING_CYCLES,
        "necessary condition dR/tR^2 = dL/tL^2 fails",
        ev,
    )


def _reduce_cases(c: CanonicalParams, depth: int) -> Verdict:
    """tL < 0 < tR with some negative determinant: symmetry reductions."""
    aL, aR = c.aL, c.aR
    if aL == 0.0 and aR == 0.0:
        return Verdict(
            VerdictKind.AT_MOST_ONE,
            "continuous system: at most one crossing limit cycle",
            (("continuous", None),),
        )
    if aL > 0.0 >= aR:
        if aR == 0.0 and c.tR * c.tR - 4.0 * c.dR >= 0.0:
            return Verdict(
                VerdictKind.NO_CROSSING_CYCLES,
                "boundary equilibrium of node or saddle type on the switching line",
                (("boundary-node", None),),
            )
        return Verdict(
            VerdictKind.AT_MOST_ONE,
            "monodromic origin: at most one crossing limit cycle",
            (("monodromic", None),),
        )
    if aL < 0.0 <= aR:
        # a negative determinant puts a real saddle in the wrong half plane
        return Verdict(
            VerdictKind.NO_CROSSING_CYCLES,
            "saddle of one subsystem blocks the opposite half plane",
            (("wrong-half-plane-saddle", None),),
        )
    if aL > 0.0 and aR > 0.0:
        # rescaling x by aR (right) and aL (left) yields a continuous system
        return Verdict(
            VerdictKind.AT_MOST_ONE,
            "reducible to a continuous system: at most one crossing limit cycle",
            (("a-rescaling", None),),
        )
    # remaining sign patterns mirror into the handled ones via (x, y) -> (-x, -y)
    mirror = CanonicalParams(
        tR=c.tL, tL=c.tR, dR=c.dL, dL=c.dR, aR=-c.aL, aL=-c.aR, b=0.0
    )
    inner = verdict_pwl(mirror, depth + 1)
    return Verdict(
        inner.kind,
        inner.reason + " (after half-plane swap)",
        inner.evidence + (("mirror", None),),
    )


# ---------------------------------------------------------------------------
# Lienard verdicts


def _annulus_probe(
    sys: LienardSpec, tol: float = 1e-6
) -> Optional[float]:
    """Entry ordinate of one closed crossing orbit, or None."""
    y = -0.01
    for _ in range(20):
        legs = poincare.full_return(sys, y)
        if legs is not None:
            if abs(legs[1].y - y) <= tol * (1.0 + abs(y)):
                return y
            return None
        y *= 2.0
    return None


def verdict_lienard(
    sys: LienardSpec, xmax: float = 100.0, pmax: Optional[float] = None
) -> tuple[Verdict, HypothesisReport]:
    """Verdict from the hypothesis checks, with the report as evidence."""
    rep = hypothesis_report(sys, xmax=xmax, pmax=pmax)
    gate = rep.h1.holds and rep.h2 and rep.h3_holds
    ev = (("hypotheses", rep),)
    if rep.lambda_zero:
        y = _annulus_probe(sys)
        if y is not None:
            return (
                Verdict(
                    VerdictKind.ANNULUS,
                    "identically balanced half maps with a closed orbit",
                    ev + (("closed-orbit-entry", y),),
                ),
                rep,
            )
        return (
            Verdict(
                VerdictKind.INCONCLUSIVE,
                "balanced half maps but no closed orbit found",
                ev,
            ),
            rep,
        )
    if gate and not rep.star_solutions:
        return (
            Verdict(
                VerdictKind.NO_CROSSING_CYCLES,
                "necessary crossing equations have no solution on the scanned range",
                ev,
            ),
            rep,
        )
    if gate and rep.unique_star:
        h4_ok = rep.h4 is not None and rep.h4.checked and rep.h4.holds
        h5_ok = rep.h5 is not None and rep.h5.checked and rep.h5.holds
        if h4_ok or h5_ok:
            return (
                Verdict(
                    VerdictKind.AT_MOST_ONE_STABLE,
                    "unique crossing candidate with a monotone comparison function",
                    ev + (("via", "h4" if h4_ok else "h5"),),
                ),
                rep,
            )
    failing = [
        name
        for name, ok in (
            ("h1", rep.h1.holds),
            ("h2", rep.h2),
            ("h3", rep.h3_holds),
            ("unique-star", rep.unique_star),
            (
                "h4-or-h5",
                (rep.h4 is not None and rep.h4.checked and rep.h4.holds)
                or (rep.h5 is not None and rep.h5.checked and rep.h5.holds),
            ),
        )
        if not ok
    ]
    return (
        Verdict(
            VerdictKind.INCONCLUSIVE,
            "hypotheses not verified: " + ", ".join(failing),
            ev + (("failing", tuple(failing)),),
        ),
        rep,
    )


# ---------------------------------------------------------------------------
# Combined report


@dataclass(frozen=True)
class FullReport:
    verdict: Verdict
    hypotheses: Optional[HypothesisReport]
    cycles: tuple[CycleRecord, ...]
    canonical: Optional[CanonicalParams] = None
    contradictions: tuple[str, ...] = field(default_factory=tuple)


def full_report(
    system: Union[PwlSpec, LienardSpec],
    bracket_cap: float = 1e6,
    xmax: float = 100.0,
) -> FullReport:
    """Verdict plus numeric cycle search, cross-checked for consistency.

    Piecewise-linear inputs with a nonempty sliding set raise
    SlidingPresent; inputs whose off-diagonal signs disagree get an
    immediate no-cycles verdict without any numeric work.
    """
    canonical = None
    hyp = None
    if isinstance(system, PwlSpec):
        intervals = sliding_set(system)
        if intervals:
            raise SlidingPresent(None, intervals)
        try:
            canonical = canonicalize(system)
        except CoefficientSignError:
            return FullReport(
                verdict=Verdict(
                    VerdictKind.NO_CROSSING_CYCLES,
                    "opposed off-diagonal signs forbid crossing limit cycles",
                    (("a12-sign", None),),
                ),
                hypotheses=None,
                cycles=(),
            )
        verdict = verdict_pwl(canonical)
        sys = as_lienard(canonical)
        hyp = hypothesis_report(sys, xmax=xmax)
    else:
        sys = system
        verdict, hyp = verdict_lienard(system, xmax=xmax)

    if verdict.kind is VerdictKind.ANNULUS and canonical is not None:
        y = _annulus_probe(sys)
        if y is None:
            verdict = Verdict(
                VerdictKind.NO_CROSSING_CYCLES,
                verdict.reason + "; no closed orbit found",
                verdict.evidence + (("annulus-probe", None),),
            )
            cycles: tuple[CycleRecord, ...] = ()
        else:
            verdict = Verdict(
                verdict.kind,
                verdict.reason,
                verdict.evidence + (("closed-orbit-entry", y),),
            )
            cycles = (poincare._build_cycle(sys, y, "auto", 1e4),)
    elif verdict.kind is VerdictKind.ANNULUS:
        cycles = tuple(
            poincare._build_cycle(sys, ev[1], "auto", 1e4)
            for ev in verdict.evidence
            if ev[0] == "closed-orbit-entry"
        )
    else:
        cycles = tuple(poincare.find_crossing_cycles(sys, bracket_cap=bracket_cap))

    contradictions = []
    if verdict.kind is VerdictKind.NO_CROSSING_CYCLES and cycles:
        contradictions.append("verdict excludes cycles but the search found one")
    if (
        verdict.kind
        in (
            VerdictKind.AT_MOST_ONE_STABLE,
            VerdictKind.AT_MOST_ONE_UNSTABLE,
            VerdictKind.AT_MOST_ONE,
        )
        and len(cycles) > 1
    ):
        contradictions.append("verdict bounds cycles by one but the search found more")
    return FullReport(
        verdict=verdict,
        hypotheses=hyp,
        cycles=cycles,
        canonical=canonical,
        contradictions=tuple(contradictions),
    )

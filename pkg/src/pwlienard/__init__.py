"""Crossing limit cycle analysis for planar piecewise-smooth systems.

Library layout: expression language (exprlang), system models (model),
piecewise-linear canonical reduction (canonical), hypothesis machinery
(hypotheses), flow engines (flow, linearflow), half-return maps and
cycle search (poincare), theorem-backed verdicts (classify), and the
command-line front end (cli).
"""

from .canonical import (
    CoefficientSignError,
    SlidingPresent,
    as_lienard,
    canonicalize,
    demo_system,
    pwl_from_canonical,
    sliding_set,
)
from .classify import FullReport, full_report, verdict_lienard, verdict_pwl
from .hypotheses import (
    HypothesisReport,
    PCoord,
    check_h1,
    check_h2,
    check_h4,
    check_h5,
    eta_limits,
    hypothesis_report,
    solve_star,
)
from .model import (
    CanonicalParams,
    CycleRecord,
    DegenerateSystem,
    EquilibriumKind,
    EquilibriumRecord,
    LienardSpec,
    PwlSpec,
    SideFuncs,
    SwitchKind,
    SwitchPointClass,
    Verdict,
    VerdictKind,
    classify_switch_point,
    equilibrium_census,
    virtual_equilibria,
)
from .poincare import (
    BelowThreshold,
    HalfMapResult,
    NotFocus,
    find_crossing_cycles,
    full_return,
    half_map_left,
    half_map_right,
    left_threshold,
    parametric_half_map,
)

__version__ = "1.0.0"

__all__ = [
    "BelowThreshold",
    "CanonicalParams",
    "CoefficientSignError",
    "CycleRecord",
    "DegenerateSystem",
    "EquilibriumKind",
    "EquilibriumRecord",
    "FullReport",
    "HalfMapResult",
    "HypothesisReport",
    "LienardSpec",
    "NotFocus",
    "PCoord",
    "PwlSpec",
    "SideFuncs",
    "SlidingPresent",
    "SwitchKind",
    "SwitchPointClass",
    "Verdict",
    "VerdictKind",
    "as_lienard",
    "canonicalize",
    "check_h1",
    "check_h2",
    "check_h4",
    "check_h5",
    "classify_switch_point",
    "demo_system",
    "equilibrium_census",
    "eta_limits",
    "find_crossing_cycles",
    "full_report",
    "full_return",
    "half_map_left",
    "half_map_right",
    "hypothesis_report",
    "left_threshold",
    "parametric_half_map",
    "pwl_from_canonical",
    "sliding_set",
    "solve_star",
    "verdict_lienard",
    "verdict_pwl",
    "virtual_equilibria",
]

import numpy as np
import pytest

from pwlienard.canonical import (
    SlidingPresent,
    as_lienard,
    canonicalize,
    demo_system,
    pwl_from_canonical,
)
from pwlienard.classify import full_report, verdict_lienard, verdict_pwl
from pwlienard.model import (
    CanonicalParams,
    DegenerateSystem,
    LienardSpec,
    PwlSpec,
    VerdictKind,
)


def cp(tR, dR, aR, tL, dL, aL, b=0.0):
    return CanonicalParams(tR=tR, tL=tL, dR=dR, dL=dL, aR=aR, aL=aL, b=b)


def demo_lienard(chi):
    return as_lienard(canonicalize(demo_system(chi)))


class TestVerdictPwl:
    def test_demo_chi1_stable(self):
        v = verdict_pwl(cp(2, 2, 2, -4, 5, 5))
        assert v.kind is VerdictKind.AT_MOST_ONE_STABLE
        ev = dict(v.evidence)
        assert ev["aR/tR"] == 1.0
        assert ev["aL/tL"] == -1.25
        assert ev["dR/tR^2"] == 0.5
        assert ev["dL/tL^2"] == pytest.approx(5 / 16)

    def test_time_reversed_demo_unstable(self):
        v = verdict_pwl(cp(-2, 2, 2, 4, 5, 5))
        assert v.kind is VerdictKind.AT_MOST_ONE_UNSTABLE
        assert ("time-reversal", None) in v.evidence

    def test_equality_chain_annulus(self):
        # aR/tR = aL/tL and dR/tR^2 = dL/tL^2
        v = verdict_pwl(cp(2, 2, 2, -4, 8, -4))
        assert v.kind is VerdictKind.ANNULUS

    def test_necessary_condition_failure(self):
        # aR/tR > aL/tL but dR/tR^2 < dL/tL^2
        v = verdict_pwl(cp(2, 1, 2, -4, 9, 5))
        assert v.kind is VerdictKind.NO_CROSSING_CYCLES

    def test_trace_lemma(self):
        for args in [(2, 2, 0, 4, 5, 0), (-2, 2, 0, -4, 5, 0), (0, 2, 0, 0, 5, 0)]:
            v = verdict_pwl(cp(*args))
            assert v.kind is VerdictKind.NO_CROSSING_CYCLES

    def test_continuous_case(self):
        v = verdict_pwl(cp(2, -1, 0, -4, 5, 0))
        assert v.kind is VerdictKind.AT_MOST_ONE
        assert ("continuous", None) in v.evidence

    def test_boundary_node_case(self):
        # aL > 0 = aR with real right eigenvalues: no cycles
        v = verdict_pwl(cp(3, 1, 0, -4, -5, 2))
        assert v.kind is VerdictKind.NO_CROSSING_CYCLES

    def test_monodromic_case(self):
        v = verdict_pwl(cp(1, 2, 0, -4, -5, 2))
        assert v.kind is VerdictKind.AT_MOST_ONE

    def test_wrong_half_plane_saddle(self):
        v = verdict_pwl(cp(2, -1, 1, -4, 5, -2))
        assert v.kind is VerdictKind.NO_CROSSING_CYCLES

    def test_rescaling_case(self):
        v = verdict_pwl(cp(2, -1, 1, -4, 5, 2))
        assert v.kind is VerdictKind.AT_MOST_ONE

    def test_mirror_chain(self):
        # aL < 0 and aR < 0 mirrors into the aL, aR > 0 case
        v = verdict_pwl(cp(2, -1, -1, -4, 5, -2))
        assert ("mirror", None) in v.evidence
        assert v.kind is VerdictKind.AT_MOST_ONE

    def test_guards(self):
        with pytest.raises(DegenerateSystem):
            verdict_pwl(cp(2, 0, 2, -4, 5, 5))
        with pytest.raises(SlidingPresent):
            verdict_pwl(cp(2, 2, 2, -4, 5, 5, b=0.3))


def random_canonical(rng):
    tR = rng.uniform(-3, 3)
    tL = rng.uniform(-3, 3)
    dR = rng.uniform(-3, 3)
    dL = rng.uniform(-3, 3)
    aR = rng.uniform(-3, 3)
    aL = rng.uniform(-3, 3)
    if dR == 0.0:
        dR = 1.0
    if dL == 0.0:
        dL = 1.0
    return cp(tR, dR, aR, tL, dL, aL)


class TestSymmetryProperties:
    def test_time_reversal_swaps_stability(self):
        rng = np.random.default_rng(21)
        swap = {
            VerdictKind.AT_MOST_ONE_STABLE: VerdictKind.AT_MOST_ONE_UNSTABLE,
            VerdictKind.AT_MOST_ONE_UNSTABLE: VerdictKind.AT_MOST_ONE_STABLE,
        }
        for _ in range(300):
            c = random_canonical(rng)
            rev = cp(-c.tR, c.dR, c.aR, -c.tL, c.dL, c.aL)
            v, w = verdict_pwl(c), verdict_pwl(rev)
            assert w.kind is swap.get(v.kind, v.kind)

    def test_half_plane_mirror_is_invariant(self):
        rng = np.random.default_rng(22)
        for _ in range(300):
            c = random_canonical(rng)
            mir = cp(c.tL, c.dL, -c.aL, c.tR, c.dR, -c.aR)
            assert verdict_pwl(mir).kind is verdict_pwl(c).kind


class TestVerdictLienard:
    def test_demo_chi0_stable(self):
        v, rep = verdict_lienard(demo_lienard(0.0))
        assert v.kind is VerdictKind.AT_MOST_ONE_STABLE
        assert rep.h5.holds

    def test_symmetric_annulus(self):
        v, rep = verdict_lienard(LienardSpec.linear(1, 1, 0, -1, 1, 0))
        assert v.kind is VerdictKind.ANNULUS
        assert rep.lambda_zero

    def test_h3_violation_named(self):
        v, _ = verdict_lienard(LienardSpec.linear(2, 2, -2, -4, 5, -5))
        assert v.kind is VerdictKind.INCONCLUSIVE
        assert "h3" in v.reason

    def test_no_star_no_cycles(self):
        v, _ = verdict_lienard(LienardSpec.linear(2, 1, 2, -4, 9, 5))
        assert v.kind is VerdictKind.NO_CROSSING_CYCLES


class TestFullReport:
    @pytest.mark.parametrize("chi,count", [(1.0, 1), (0.0, 2), (-0.01, 3)])
    def test_demo_pwl(self, chi, count):
        rep = full_report(demo_system(chi))
        assert rep.verdict.kind is VerdictKind.AT_MOST_ONE_STABLE
        assert len(rep.cycles) == 1
        assert rep.cycles[0].enclosed_count == count
        assert rep.contradictions == ()
        assert rep.canonical.tR == 2.0

    def test_sliding_refused(self):
        import numpy as _np

        p = PwlSpec(
            Aplus=_np.array([[0.0, 1.0], [-1.0, 0.0]]),
            bplus=_np.array([0.0, 0.0]),
            Aminus=_np.array([[0.0, 1.0], [-1.0, 0.0]]),
            bminus=_np.array([-1.0, 0.0]),
        )
        with pytest.raises(SlidingPresent):
            full_report(p)

    def test_a12_sign_guard(self):
        import numpy as _np

        # a12+ = 0 with b1+ = 0: the sliding set is empty but the
        # off-diagonal sign product is nonpositive
        p = PwlSpec(
            Aplus=_np.array([[1.0, 0.0], [-1.0, 2.0]]),
            bplus=_np.array([0.0, 1.0]),
            Aminus=_np.array([[0.0, -1.0], [1.0, 0.0]]),
            bminus=_np.array([0.0, 0.0]),
        )
        rep = full_report(p)
        assert rep.verdict.kind is VerdictKind.NO_CROSSING_CYCLES
        assert ("a12-sign", None) in rep.verdict.evidence
        assert rep.cycles == ()

    def test_continuous_pwl(self):
        rep = full_report(pwl_from_canonical(cp(2, -1, 0, -4, 5, 0)))
        assert rep.verdict.kind is VerdictKind.AT_MOST_ONE

    def test_annulus_attaches_cycle(self):
        rep = full_report(pwl_from_canonical(cp(2, 2, 2, -4, 8, -4)))
        assert rep.verdict.kind is VerdictKind.ANNULUS
        assert len(rep.cycles) == 1
        assert abs(rep.cycles[0].lambda_gamma) <= 1e-6

    def test_lienard_input(self):
        rep = full_report(demo_lienard(1.0))
        assert rep.verdict.kind is VerdictKind.AT_MOST_ONE_STABLE
        assert rep.canonical is None
        assert len(rep.cycles) == 1

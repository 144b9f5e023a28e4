import math

import numpy as np
import pytest
from scipy.optimize import bisect

from pwlienard.canonical import as_lienard, canonicalize, demo_system
from pwlienard.hypotheses import PCoord, solve_star
from pwlienard.model import LienardSpec
from pwlienard.poincare import (
    BelowThreshold,
    NotFocus,
    cycle_csv,
    find_crossing_cycles,
    full_return,
    half_map_left,
    half_map_right,
    left_threshold,
    parametric_half_map,
)


def demo_lienard(chi):
    return as_lienard(canonicalize(demo_system(chi)))


def right_tangent_time():
    """First return time of the right tangent orbit of the demo system."""
    return bisect(
        lambda t: math.exp(-t) - math.cos(t) + math.sin(t),
        math.pi + 1e-12,
        2 * math.pi - 1e-12,
        xtol=1e-15,
    )


class TestHalfMapRight:
    def test_domain_check(self):
        with pytest.raises(ValueError):
            half_map_right(demo_lienard(1.0), 1.0)

    def test_tangent_value_exact(self):
        sys = demo_lienard(1.0)
        t_hat = right_tangent_time()
        expected = -2.0 * math.exp(t_hat) * math.sin(t_hat)
        res = half_map_right(sys, 0.0)
        assert res.time == pytest.approx(t_hat, abs=1e-12)
        assert res.y == pytest.approx(expected, rel=1e-12)
        assert expected == pytest.approx(73.76334293960772, abs=1e-10)

    def test_rk_matches_exact_oracle(self):
        sys = demo_lienard(1.0)
        exact = half_map_right(sys, 0.0, method="exact")
        rk = half_map_right(sys, 0.0, method="rk")
        assert rk.y == pytest.approx(exact.y, rel=1e-6)
        assert rk.time == pytest.approx(exact.time, abs=1e-6)

    def test_rk_matches_exact_generic_ordinates(self):
        sys = demo_lienard(1.0)
        for y0 in (-0.25, -2.0, -15.0):
            exact = half_map_right(sys, y0, method="exact")
            rk = half_map_right(sys, y0, method="rk")
            assert rk.y == pytest.approx(exact.y, rel=1e-7)


class TestHalfMapLeft:
    def test_chi0_closed_form(self):
        # boundary-focus left side: z1 = -exp(-2 pi) z0, flight time pi
        sys = demo_lienard(0.0)
        scale = -math.exp(-2 * math.pi)
        for z0 in np.linspace(0.5, 120.0, 20):
            res = half_map_left(sys, z0)
            assert res.y == pytest.approx(scale * z0, rel=1e-6)
            assert res.time == pytest.approx(math.pi, abs=1e-9)

    def test_chi0_rk_matches(self):
        sys = demo_lienard(0.0)
        scale = -math.exp(-2 * math.pi)
        for z0 in (1.0, 40.0):
            res = half_map_left(sys, z0, method="rk")
            assert res.y == pytest.approx(scale * z0, rel=1e-6)

    def test_domain_check(self):
        with pytest.raises(ValueError):
            half_map_left(demo_lienard(1.0), -1.0)

    def test_below_threshold(self):
        sys = demo_lienard(-0.01)
        z_hat = left_threshold(sys)
        assert z_hat == pytest.approx(30.306122652342815, rel=1e-10)
        with pytest.raises(BelowThreshold):
            half_map_left(sys, 0.5 * z_hat)
        assert half_map_left(sys, 1.5 * z_hat) is not None

    def test_threshold_formula(self):
        # z_hat = 5 eps e^{2 t} sin t with t the root of
        # e^{-2t}(2 sin t + cos t) = 1 on (pi, 2 pi) for the reversed flight
        sys = demo_lienard(-0.01)
        z_hat = left_threshold(sys)
        t_hat = 3.6055704468057077
        formula = 5 * (-0.01) * math.exp(2 * t_hat) * math.sin(t_hat)
        assert z_hat == pytest.approx(formula, rel=1e-9)

    def test_threshold_zero_when_no_left_tangency(self):
        assert left_threshold(demo_lienard(1.0)) == 0.0

    def test_threshold_rk_matches_exact(self):
        sys = demo_lienard(-0.01)
        exact = left_threshold(sys, method="exact")
        rk = left_threshold(sys, method="rk")
        assert rk == pytest.approx(exact, rel=1e-6)


class TestSlopeLimits:
    def test_right_slope_limit(self):
        # far entries make a near half turn: slope tends to -e^{pi alpha/omega}
        sys = demo_lienard(1.0)
        y0, h = -1e4, 1.0
        slope = (
            half_map_right(sys, y0 + h).y - half_map_right(sys, y0 - h).y
        ) / (2 * h)
        assert slope == pytest.approx(-math.exp(math.pi), rel=0.02)

    def test_left_slope_limit(self):
        sys = demo_lienard(1.0)
        z0, h = 1e4, 1.0
        slope = (
            half_map_left(sys, z0 + h).y - half_map_left(sys, z0 - h).y
        ) / (2 * h)
        assert slope == pytest.approx(-math.exp(-2 * math.pi), rel=0.02)

    def test_composed_slope_limit(self):
        sys = demo_lienard(1.0)

        def ret(y0):
            r, lft = full_return(sys, y0)
            return lft.y

        y0, h = -1e4, 1.0
        slope = (ret(y0 + h) - ret(y0 - h)) / (2 * h)
        assert slope == pytest.approx(math.exp(-math.pi), rel=0.02)


class TestParametric:
    def test_right_sample_value(self):
        sys = demo_lienard(1.0)
        y0, _ = parametric_half_map(sys.plus, 1.5 * math.pi)
        assert y0 == pytest.approx(1.0 - math.exp(-1.5 * math.pi), rel=1e-12)

    def test_right_divergence_past_half_turn(self):
        sys = demo_lienard(1.0)
        y0, _ = parametric_half_map(sys.plus, math.pi + 1e-6)
        assert y0 < -1e5

    def test_left_small_time_expansion(self):
        # z0 ~ aL T / 2 as T -> 0+
        sys = demo_lienard(1.0)
        for T in (1e-3, 1e-4):
            z0, _ = parametric_half_map(sys.minus, T)
            assert z0 == pytest.approx(5.0 * T / 2.0, rel=1e-3)

    def test_not_focus(self):
        sys = LienardSpec.linear(3.0, 1.0, 0.0, -1.0, 1.0, 0.0)
        with pytest.raises(NotFocus):
            parametric_half_map(sys.plus, 1.0)

    def test_right_oracle_equivalence(self):
        sys = demo_lienard(1.0)
        t_hat = right_tangent_time()
        for T in np.linspace(math.pi + 0.05, t_hat - 0.01, 100):
            y0, y1 = parametric_half_map(sys.plus, T)
            assert y0 <= 0
            res = half_map_right(sys, y0, method="exact")
            assert res.time == pytest.approx(T, abs=1e-9)
            assert res.y == pytest.approx(y1, rel=1e-7, abs=1e-7)

    def test_left_oracle_equivalence(self):
        sys = demo_lienard(1.0)
        for T in np.linspace(0.2, math.pi - 0.05, 100):
            z0, z1 = parametric_half_map(sys.minus, T)
            assert z0 >= 0
            res = half_map_left(sys, z0, method="exact")
            assert res.time == pytest.approx(T, abs=1e-9)
            assert res.y == pytest.approx(z1, rel=1e-7, abs=1e-7)


class TestFindCycles:
    def test_chi1_values(self):
        sys = demo_lienard(1.0)
        (c,) = find_crossing_cycles(sys)
        assert c.y_bottom == pytest.approx(-2.85228, abs=1e-4)
        assert c.y_top == pytest.approx(120.721, abs=1e-2)
        assert c.period == pytest.approx(5.67239, abs=1e-4)
        assert c.lambda_gamma == pytest.approx(-2.26601, abs=1e-4)
        assert c.map_derivative == pytest.approx(0.103725, abs=1e-4)
        assert c.enclosed_count == 1

    @pytest.mark.parametrize("chi,count", [(1.0, 1), (0.0, 2), (-0.01, 3)])
    def test_enclosed_counts(self, chi, count):
        (c,) = find_crossing_cycles(demo_lienard(chi))
        assert c.enclosed_count == count

    def test_fixed_point_residual(self):
        sys = demo_lienard(0.0)
        (c,) = find_crossing_cycles(sys)
        _, lft = full_return(sys, c.y_bottom)
        assert abs(lft.y - c.y_bottom) <= 1e-9

    def test_map_derivative_matches_multiplier(self):
        for chi in (1.0, 0.0, -0.01):
            (c,) = find_crossing_cycles(demo_lienard(chi))
            assert abs(c.map_derivative - math.exp(c.lambda_gamma)) <= 0.01 * math.exp(
                c.lambda_gamma
            )

    def test_rk_agrees_with_exact(self):
        sys = demo_lienard(1.0)
        (exact,) = find_crossing_cycles(sys, method="exact")
        (rk,) = find_crossing_cycles(sys, method="rk")
        assert rk.y_bottom == pytest.approx(exact.y_bottom, rel=1e-6)
        assert rk.period == pytest.approx(exact.period, rel=1e-6)

    def test_symmetric_annulus_no_isolated_cycle(self):
        # every orbit is periodic; the displacement never changes sign
        sys = LienardSpec.linear(1.0, 1.0, 0.0, -1.0, 1.0, 0.0)
        for y0 in np.linspace(-8.0, -0.5, 10):
            _, lft = full_return(sys, y0)
            assert abs(lft.y - y0) <= 1e-8

    def test_no_cycles_when_trace_signs_agree(self):
        sys = LienardSpec.linear(1.0, 1.0, 0.0, 0.5, 1.0, 0.0)
        assert find_crossing_cycles(sys, bracket_cap=1e3) == []


def side_areas(sys, cycle, n=20001):
    """Areas S(right), S(left) of the cycle's arcs in the (p, y)-plane."""
    pc = PCoord(sys, xmax=float(np.max(np.abs(cycle.polyline[:, 1]))) + 1.0)
    right, left = full_return(sys, cycle.y_bottom)
    out = []
    for res in (right, left):
        ts = np.linspace(0.0, res.time, n)
        states = res.arc.states(ts) if hasattr(res.arc, "states") else None
        if states is None:
            states = np.vstack([seg.states for seg in res.arc])
        ps = np.array([pc.p(x) for x in states[:, 0]])
        ys = states[:, 1]
        # region between the arc and the y-axis: |integral of p dy|
        out.append(abs(float(np.trapezoid(ps, ys))))
    return out


class TestCycleGeometry:
    @pytest.mark.parametrize("chi", [1.0, 0.0, -0.01])
    def test_area_identity(self, chi):
        sys = demo_lienard(chi)
        (c,) = find_crossing_cycles(sys)
        s_plus, s_minus = side_areas(sys, c)
        assert abs(s_plus - s_minus) <= 1e-4 * (s_plus + s_minus)

    def test_transversal_crossing_of_star_verticals(self):
        sys = demo_lienard(1.0)
        (c,) = find_crossing_cycles(sys)
        (s,) = solve_star(sys)
        xs = c.polyline[:, 1]
        assert xs.max() > s.x_plus
        assert xs.min() < s.x_minus

    def test_cycle_csv(self, tmp_path):
        sys = demo_lienard(1.0)
        (c,) = find_crossing_cycles(sys)
        out = tmp_path / "cycle.csv"
        cycle_csv(c, out)
        lines = out.read_text().strip().splitlines()
        assert lines[0].startswith("# y_top")
        assert lines[1] == "t,x,y,side"
        assert len(lines) == len(c.polyline) + 2
        last = lines[-1].split(",")
        assert last[3] == "left"

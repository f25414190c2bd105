"""Unit tests for the bound evaluations against the published table values."""

import numpy as np
import pytest

from po2bounds.bounds import (
    dominant_term,
    order_wise_exponent,
    ssc_feasibility,
    upper_bound,
)
from po2bounds.meanfield import SystemParams

TABLE1 = {10: 3.2773, 100: 3.6411, 1000: 4.0455, 10000: 4.4955}
TABLE2 = {10: 28.2972, 100: 31.6293, 1000: 35.3629, 10000: 39.5457}


class TestDominantTerm:
    @pytest.mark.parametrize("n,expected", sorted(TABLE1.items()))
    def test_table1_cells(self, n, expected):
        rep = dominant_term(SystemParams(n_servers=n, gamma=0.1, alpha=0.05))
        assert rep.scaled_asymptotic == pytest.approx(expected, rel=0.01)

    @pytest.mark.parametrize("n,expected", sorted(TABLE2.items()))
    def test_table2_cells(self, n, expected):
        rep = dominant_term(SystemParams(n_servers=n, gamma=0.01, alpha=0.05))
        assert rep.scaled_asymptotic == pytest.approx(expected, rel=0.01)

    def test_report_consistency(self):
        p = SystemParams(n_servers=100, gamma=0.1, alpha=0.05)
        rep = dominant_term(p)
        assert rep.dominant_term > 0
        assert rep.scaled_asymptotic == pytest.approx(100 * rep.dominant_term, rel=1e-15)
        assert rep.scaled_upper == 4.0 * rep.scaled_asymptotic
        assert rep.lam == p.lam
        assert rep.buffer_used == p.buffer
        assert rep.alpha_valid

    def test_alpha_validity_flag(self):
        rep = dominant_term(SystemParams(n_servers=100, gamma=0.1, alpha=0.1))
        assert not rep.alpha_valid

    def test_positivity_sweep(self):
        rng = np.random.default_rng(17)
        for _ in range(20):
            p = SystemParams(
                n_servers=int(rng.integers(5, 5000)),
                gamma=float(rng.uniform(0.01, 1.0)),
                alpha=float(rng.uniform(0.0, 0.15)),
            )
            assert dominant_term(p).dominant_term > 0

    def test_buffer_insensitivity(self):
        base = SystemParams(n_servers=1000, gamma=0.1, alpha=0.05)
        wide = SystemParams(n_servers=1000, gamma=0.1, alpha=0.05, buffer=base.buffer + 8)
        a = dominant_term(base).scaled_asymptotic
        b = dominant_term(wide).scaled_asymptotic
        assert abs(a - b) / a < 1e-6

    def test_upper_bound_is_four_times(self):
        p = SystemParams(n_servers=10, gamma=0.1, alpha=0.05)
        assert upper_bound(p) == pytest.approx(4 * dominant_term(p).dominant_term, rel=1e-15)
        assert 10 * upper_bound(p) == pytest.approx(13.1092, rel=0.01)


class TestOrderWiseExponent:
    def test_small_alpha_branch(self):
        assert order_wise_exponent(0.05, 0.01) == pytest.approx(0.86)

    def test_large_alpha_branch(self):
        assert order_wise_exponent(0.2, 0.01) == pytest.approx(0.13)

    def test_boundary_goes_to_second_branch(self):
        a = 1.0 / 12.0
        assert order_wise_exponent(a, 0.01) == pytest.approx(1 - 4 * a - 0.07)

    @pytest.mark.parametrize("alpha", [0.0, 0.25, 0.3, -0.1])
    def test_domain(self, alpha):
        with pytest.raises(ValueError):
            order_wise_exponent(alpha, 0.01)


class TestSscFeasibility:
    def test_worked_example(self):
        feas = ssc_feasibility(0.05, 1e-9)
        assert feas.r_min == 32
        lo, hi = feas.epsilon_interval
        assert feas.feasible and lo < 24.54 < hi

    def test_interval_formulas(self):
        alpha, xi = 0.03, 1e-6
        feas = ssc_feasibility(alpha, xi)
        r = feas.r_min
        assert feas.epsilon_interval[0] == pytest.approx(2 * r * (1 + 3 * alpha + 3 * xi) / 3)
        assert feas.epsilon_interval[1] == pytest.approx(r * (1 - 4 * alpha - 7 * xi) - 1 - alpha - xi)
        # r_min - 1 must not clear the strict bound
        assert r - 1 <= 3 * (1 + alpha + xi) / (1 - 18 * alpha - 27 * xi)

    def test_alpha_at_boundary_rejected(self):
        with pytest.raises(ValueError):
            ssc_feasibility(1.0 / 18.0, 1e-9)

    def test_large_xi_rejected(self):
        with pytest.raises(ValueError):
            ssc_feasibility(0.05, 0.1)  # 1 - 18a - 27xi < 0

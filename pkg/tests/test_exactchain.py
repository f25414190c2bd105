"""Unit tests for the exact stationary oracle."""

from math import comb

import numpy as np
import pytest

from po2bounds import exactchain
from po2bounds.exactchain import (
    LatticeStateSpace,
    StateSpaceTooLarge,
    StationaryDistribution,
    build_generator,
    exact_mse,
    stationary,
)
from po2bounds.meanfield import SystemParams, equilibrium

# frozen from an independent dense least-squares solve of pi Q = 0
GOLDEN_MSE_N10_B2 = 0.0582261222954399
GOLDEN_MSE_N15_B2 = 0.0389866276617608


class TestLatticeStateSpace:
    def test_count(self):
        for n, b in [(4, 2), (10, 2), (6, 3)]:
            assert LatticeStateSpace.build(n, b).count == comb(n + b, b)

    def test_enumeration_snapshot(self):
        space = LatticeStateSpace.build(2, 2)
        expected = [(0, 0), (1, 0), (2, 0), (1, 1), (2, 1), (2, 2)]
        assert [tuple(r) for r in space.states.tolist()] == expected

    def test_monotone_and_indexable(self):
        space = LatticeStateSpace.build(5, 3)
        for i, row in enumerate(space.states):
            assert row[0] >= row[1] >= row[2] >= 0
            assert space.index_of(row) == i

    def test_cap(self):
        with pytest.raises(StateSpaceTooLarge):
            LatticeStateSpace.build(200, 3)


class TestGenerator:
    def test_rows_sum_to_zero(self):
        p = SystemParams(n_servers=6, gamma=0.1, alpha=0.05, buffer=3)
        gen = build_generator(p)
        sums = np.asarray(gen.matrix.sum(axis=1)).ravel()
        assert np.max(np.abs(sums)) < 1e-12
        off = gen.matrix.toarray() - np.diag(gen.matrix.diagonal())
        assert off.min() >= 0.0

    def test_full_state_exit_rate(self):
        p = SystemParams(n_servers=5, gamma=0.2, alpha=0.0, buffer=2)
        gen = build_generator(p)
        i = gen.space.index_of((5, 5))
        assert -gen.matrix[i, i] == pytest.approx(5.0)  # departures only

    def test_empty_state_exit_rate(self):
        p = SystemParams(n_servers=5, gamma=0.2, alpha=0.0, buffer=2)
        gen = build_generator(p)
        i = gen.space.index_of((0, 0))
        assert -gen.matrix[i, i] == pytest.approx(p.lam * 5)  # arrivals to level 1 only

    def test_b1_birth_death_rates(self):
        p = SystemParams(n_servers=8, gamma=0.3, alpha=0.0, buffer=1)
        gen = build_generator(p).matrix.toarray()
        for m in range(8):
            assert gen[m, m + 1] == pytest.approx(p.lam * 8 * (1 - (m / 8) ** 2))
        for m in range(1, 9):
            assert gen[m, m - 1] == pytest.approx(float(m))


class TestStationary:
    def test_b1_product_form(self):
        p = SystemParams(n_servers=12, gamma=0.2, alpha=0.1, buffer=1)
        dist = stationary(build_generator(p))
        n, lam = 12, p.lam
        w = np.ones(n + 1)
        for m in range(n):
            w[m + 1] = w[m] * (lam * n * (1 - (m / n) ** 2)) / (m + 1)
        w /= w.sum()
        assert np.max(np.abs(dist.pi - w)) < 1e-10

    def test_b1_detailed_balance(self):
        p = SystemParams(n_servers=10, gamma=0.1, alpha=0.05, buffer=1)
        gen = build_generator(p)
        dist = stationary(gen)
        q = gen.matrix.toarray()
        for m in range(10):
            assert dist.pi[m] * q[m, m + 1] == pytest.approx(
                dist.pi[m + 1] * q[m + 1, m], rel=1e-10
            )

    def test_normalization_and_residual(self):
        p = SystemParams(n_servers=10, gamma=0.1, alpha=0.05, buffer=2)
        dist = stationary(build_generator(p))
        assert abs(dist.pi.sum() - 1.0) < 1e-12
        assert dist.residual <= 1e-10

    def test_power_iteration_matches_dense(self, monkeypatch):
        p = SystemParams(n_servers=12, gamma=0.2, alpha=0.1, buffer=2)
        gen = build_generator(p)
        dense = stationary(gen)
        monkeypatch.setattr(exactchain, "DENSE_SOLVE_LIMIT", 10)
        power = stationary(gen)
        assert np.max(np.abs(dense.pi - power.pi)) < 1e-9


class TestExactMse:
    def test_point_mass(self):
        p = SystemParams(n_servers=10, gamma=0.1, alpha=0.05, buffer=2)
        eq = equilibrium(p)
        space = LatticeStateSpace.build(10, 2)
        m = np.minimum.accumulate(np.round(10 * eq.s_star).astype(int))
        pi = np.zeros(space.count)
        pi[space.index_of(m)] = 1.0
        dist = StationaryDistribution(space=space, pi=pi, residual=0.0)
        expected = float(np.sum((m / 10 - eq.s_star) ** 2))
        assert exact_mse(dist, eq.s_star, p) == pytest.approx(expected, rel=1e-14)

    @pytest.mark.parametrize(
        "n,golden", [(10, GOLDEN_MSE_N10_B2), (15, GOLDEN_MSE_N15_B2)]
    )
    def test_golden_values(self, n, golden):
        p = SystemParams(n_servers=n, gamma=0.1, alpha=0.05, buffer=2)
        dist = stationary(build_generator(p))
        eq = equilibrium(p)
        assert exact_mse(dist, eq.s_star, p) == pytest.approx(golden, abs=1e-12)

    def test_below_upper_bound(self):
        # the finite-N upper bound should dominate the exact value here
        from po2bounds.bounds import upper_bound

        for n in (10, 15, 20):
            p = SystemParams(n_servers=n, gamma=0.1, alpha=0.05, buffer=2)
            dist = stationary(build_generator(p))
            eq = equilibrium(p)
            assert exact_mse(dist, eq.s_star, p) <= upper_bound(p)

    def test_dimension_check(self):
        p = SystemParams(n_servers=10, gamma=0.1, alpha=0.05, buffer=2)
        dist = stationary(build_generator(p))
        with pytest.raises(ValueError):
            exact_mse(dist, np.zeros(3), p)

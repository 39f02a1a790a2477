import itertools
import math

import numpy as np
import pytest
from scipy.optimize import linprog

from noma_cache import CachePolicy, DomainError, backhaul_load, solve_p5, zipf_popularity


class TestZipf:

    def test_uniform(self):
        np.testing.assert_allclose(zipf_popularity(5, 0.0).q, 0.2)

    def test_two_files(self):
        np.testing.assert_allclose(zipf_popularity(2, 1.0).q, [2 / 3, 1 / 3], rtol=1e-15)

    @pytest.mark.parametrize("F, zeta", [(1, 0.3), (7, 1.0), (100, 2.5), (1000, 0.8)])
    def test_normalized_and_non_increasing(self, F, zeta):
        q = zipf_popularity(F, zeta).q
        assert q.sum() == pytest.approx(1.0, abs=1e-12)
        assert np.all(np.diff(q) <= 0)

    def test_invalid(self):
        with pytest.raises(DomainError):
            zipf_popularity(0, 1.0)
        with pytest.raises(DomainError):
            zipf_popularity(3, -0.1)


class TestBackhaul:

    def test_full_cache(self):
        cat = zipf_popularity(3, 1.0)
        policy = CachePolicy.from_vector(np.ones(3), cat, 3)
        assert backhaul_load(policy, cat, 7.5) == 0.0

    def test_empty_cache(self):
        cat = zipf_popularity(3, 1.0)
        assert backhaul_load(CachePolicy.empty(cat), cat, 7.5) == pytest.approx(7.5, rel=1e-15)

    def test_arithmetic(self):
        cat = zipf_popularity(2, 1.0)
        policy = CachePolicy.from_vector([1.0, 0.0], cat, 1)
        assert backhaul_load(policy, cat, 3.0) == pytest.approx(1.0, rel=1e-15)

    def test_capacity_enforced(self):
        cat = zipf_popularity(3, 1.0)
        with pytest.raises(DomainError):
            CachePolicy.from_vector([1.0, 1.0, 0.0], cat, 1)


class TestPlacement:

    def test_cache_everything(self):
        cat = zipf_popularity(4, 1.0)
        policy = solve_p5(cat, 6)
        assert np.all(policy.c == 1) and policy.miss_mass == 0
        assert math.isinf(policy.effective_backhaul(5.0))

    def test_top_two(self):
        cat = zipf_popularity(4, 1.0)
        policy = solve_p5(cat, 2)
        np.testing.assert_array_equal(policy.c, [1, 1, 0, 0])
        assert policy.miss_mass == pytest.approx(cat.q[2] + cat.q[3], rel=1e-14)

    def test_empty(self):
        cat = zipf_popularity(4, 1.0)
        policy = solve_p5(cat, 0)
        assert policy.miss_mass == 1.0 and policy.effective_backhaul(5.0) == 5.0

    def test_fractional_capacity(self):
        cat = zipf_popularity(4, 0.7)
        np.testing.assert_allclose(solve_p5(cat, 1.5).c, [1, 0.5, 0, 0])

    @pytest.mark.parametrize("F", range(1, 7))
    def test_greedy_matches_exhaustive_vertices(self, F):
        for zeta in (0.0, 0.4, 1.0, 2.2):
            cat = zipf_popularity(F, zeta)
            for N in range(F + 1):
                best = min(math.fsum(cat.q * (1 - np.array(c)))
                           for c in itertools.product((0, 1), repeat=F) if sum(c) <= N)
                assert solve_p5(cat, N).miss_mass == pytest.approx(best, abs=1e-14)

    def test_greedy_matches_linear_program(self, rng):
        for _ in range(100):
            F = int(rng.integers(2, 9))
            cat = zipf_popularity(F, rng.uniform(0, 2))
            N = rng.uniform(0, F)
            lp = linprog(c=-cat.q, A_ub=np.ones((1, F)), b_ub=[N], bounds=[(0, 1)] * F)
            assert solve_p5(cat, N).miss_mass == pytest.approx(1 + lp.fun, abs=1e-9)

    def test_ties_broken_by_index(self):
        cat = zipf_popularity(4, 0.0)
        np.testing.assert_array_equal(solve_p5(cat, 2).c, [1, 1, 0, 0])

    def test_miss_mass_trends(self):
        zetas = np.linspace(0, 3, 31)
        for N in (1, 2, 4):
            miss = [solve_p5(zipf_popularity(10, z), N).miss_mass for z in zetas]
            assert np.all(np.diff(miss) <= 1e-15)
        miss_n = [solve_p5(zipf_popularity(10, 1.0), N).miss_mass for N in range(11)]
        assert np.all(np.diff(miss_n) <= 0)

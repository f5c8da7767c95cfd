import math

import numpy as np
import pytest

from mirror_sinkhorn import (
    DegenerateIterateError,
    TransportPolytope,
    as_marginal,
    col_normalize,
    constraint_violation,
    entropic_radius,
    independent_coupling,
    kl_divergence,
    negative_entropy,
    row_normalize,
)
from conftest import random_polytope, random_probability_matrix


class TestMarginal:
    def test_rejects_zero_entry(self):
        with pytest.raises(ValueError):
            as_marginal([0.0, 1.0])

    def test_rejects_negative_entry(self):
        with pytest.raises(ValueError):
            as_marginal([-0.1, 1.1])

    def test_rejects_bad_sum(self):
        with pytest.raises(ValueError):
            as_marginal([0.4, 0.4])

    def test_rejects_nonvector(self):
        with pytest.raises(ValueError):
            as_marginal([[0.5, 0.5]])

    def test_renormalizes_within_tolerance(self):
        v = as_marginal([0.5, 0.5 + 1e-13])
        assert v.sum() == pytest.approx(1.0, abs=0)
        assert np.all(v > 0)

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            as_marginal([np.inf, 1.0])


class TestIndependentCoupling:
    def test_uniform_two_by_two(self):
        p = TransportPolytope([0.5, 0.5], [0.5, 0.5])
        assert np.array_equal(independent_coupling(p), np.full((2, 2), 0.25))

    def test_degenerate_one_by_one(self):
        p = TransportPolytope([1.0], [1.0])
        assert np.array_equal(independent_coupling(p), [[1.0]])

    def test_outer_product_values(self):
        p = TransportPolytope([0.3, 0.7], [0.2, 0.8])
        expected = [[0.06, 0.24], [0.14, 0.56]]
        assert np.allclose(independent_coupling(p), expected, rtol=1e-14)

    def test_always_feasible(self, rng):
        p = random_polytope(rng, 5, 7)
        assert constraint_violation(independent_coupling(p), p) < 1e-14


class TestConstraintViolation:
    def test_zero_on_exact_marginals(self, rng):
        p = random_polytope(rng, 4, 6)
        assert constraint_violation(independent_coupling(p), p) == pytest.approx(0.0, abs=1e-14)

    def test_corner_plan(self):
        p = TransportPolytope([0.5, 0.5], [0.5, 0.5])
        gamma = np.array([[1.0, 0.0], [0.0, 0.0]])
        assert constraint_violation(gamma, p) == pytest.approx(2.0)

    def test_doubled_feasible_plan(self):
        p = TransportPolytope([0.5, 0.5], [0.5, 0.5])
        gamma = 2.0 * independent_coupling(p)
        assert constraint_violation(gamma, p) == pytest.approx(2.0)

    def test_shape_mismatch(self):
        p = TransportPolytope([0.5, 0.5], [0.5, 0.5])
        with pytest.raises(ValueError):
            constraint_violation(np.zeros((2, 3)), p)

    def test_zero_iff_both_residuals_zero(self, rng):
        p = random_polytope(rng, 3, 3)
        gamma = independent_coupling(p)
        gamma[0, 0] += 1e-6
        assert constraint_violation(gamma, p) > 1e-7


class TestEntropicRadius:
    def test_uniform_hundred(self):
        p = TransportPolytope(np.full(100, 0.01), np.full(100, 0.01))
        assert entropic_radius(p) == pytest.approx(2.0 * math.log(100), rel=1e-14)

    def test_point_masses(self):
        assert entropic_radius(TransportPolytope([1.0], [1.0])) == 0.0

    def test_mixed(self):
        p = TransportPolytope([0.1, 0.9], [0.5, 0.5])
        assert entropic_radius(p) == pytest.approx(math.log(10) + math.log(2), rel=1e-14)

    def test_uniform_rectangular_exact(self):
        p = TransportPolytope(np.full(8, 1 / 8), np.full(16, 1 / 16))
        assert entropic_radius(p) == math.log(8) + math.log(16)


class TestKLDivergence:
    def test_identity(self, rng):
        a = random_probability_matrix(rng, 3, 4)
        assert kl_divergence(a, a) == pytest.approx(0.0, abs=1e-15)

    def test_point_mass_vs_uniform(self):
        a = np.array([[1.0, 0.0], [0.0, 0.0]])
        b = np.full((2, 2), 0.25)
        assert kl_divergence(a, b) == pytest.approx(math.log(4), rel=1e-14)

    def test_unnormalized_second_argument(self):
        a = np.array([[0.5, 0.5]])
        b = np.array([[1.0, 1.0]])
        assert kl_divergence(a, b) == pytest.approx(1.0 - math.log(2), rel=1e-14)

    def test_nonnegative_and_zero_iff_equal(self, rng):
        for _ in range(50):
            a = random_probability_matrix(rng, 3, 3)
            b = random_probability_matrix(rng, 3, 3)
            d = kl_divergence(a, b)
            assert d >= 0.0
            assert d > 1e-12 or np.allclose(a, b, rtol=1e-12)

    def test_pinsker_at_unit_mass(self, rng):
        for _ in range(200):
            a = random_probability_matrix(rng, 2, 3, concentration=1.0)
            b = random_probability_matrix(rng, 2, 3, concentration=1.0)
            l1 = np.abs(a - b).sum()
            assert kl_divergence(a, b) >= 0.5 * l1**2 - 1e-12

    def test_zero_in_b_where_a_positive(self):
        with pytest.raises(ValueError):
            kl_divergence(np.array([[1.0]]), np.array([[0.0]]))

    def test_negative_a_rejected(self):
        with pytest.raises(ValueError):
            kl_divergence(np.array([[-0.1, 1.1]]), np.array([[0.5, 0.5]]))


class TestNegativeEntropy:
    def test_uniform(self):
        assert negative_entropy(np.full((2, 2), 0.25)) == pytest.approx(-math.log(4), rel=1e-14)

    def test_one_hot(self):
        gamma = np.zeros((3, 3))
        gamma[1, 2] = 1.0
        assert negative_entropy(gamma) == 0.0

    def test_half_half(self):
        assert negative_entropy(np.array([[0.5, 0.5]])) == pytest.approx(-math.log(2), rel=1e-14)


class TestNormalization:
    def test_row_normalize_noop_when_exact(self, rng):
        p = random_polytope(rng, 3, 5)
        gamma = independent_coupling(p)
        out = row_normalize(gamma, p.row_marginal)
        assert np.allclose(out, gamma, rtol=1e-14)

    def test_row_normalize_values(self):
        gamma = np.array([[2.0, 2.0], [1.0, 3.0]])
        out = row_normalize(gamma, np.array([0.5, 0.5]))
        assert np.allclose(out, [[0.25, 0.25], [0.125, 0.375]], rtol=1e-14)

    def test_row_normalize_single_row(self):
        out = row_normalize(np.array([[3.0, 1.0]]), np.array([1.0]))
        assert np.allclose(out, [[0.75, 0.25]], rtol=1e-14)

    def test_col_normalize_values(self):
        gamma = np.array([[2.0, 1.0], [2.0, 3.0]])
        out = col_normalize(gamma, np.array([0.5, 0.5]))
        assert np.allclose(out, [[0.25, 0.125], [0.25, 0.375]], rtol=1e-14)

    def test_col_normalize_one_by_one(self):
        assert np.allclose(col_normalize(np.array([[4.0]]), np.array([1.0])), [[1.0]])

    def test_row_sums_exact(self, rng):
        p = random_polytope(rng, 6, 4)
        gamma = rng.uniform(0.1, 2.0, (6, 4))
        out = row_normalize(gamma, p.row_marginal)
        assert np.allclose(out.sum(axis=1), p.row_marginal, rtol=1e-12, atol=0)
        out = col_normalize(gamma, p.col_marginal)
        assert np.allclose(out.sum(axis=0), p.col_marginal, rtol=1e-12, atol=0)

    def test_preserves_zero_pattern_and_ratios(self, rng):
        gamma = rng.uniform(0.5, 2.0, (4, 5))
        gamma[gamma < 0.8] = 0.0
        mu = np.full(4, 0.25)
        out = row_normalize(gamma, mu)
        assert np.array_equal(out == 0.0, gamma == 0.0)
        for i in range(4):
            pos = gamma[i] > 0
            if pos.sum() >= 2:
                ratio_in = gamma[i, pos] / gamma[i, pos][0]
                ratio_out = out[i, pos] / out[i, pos][0]
                assert np.allclose(ratio_in, ratio_out, rtol=1e-12)

    def test_zero_row_sum_raises(self):
        gamma = np.array([[0.0, 0.0], [1.0, 1.0]])
        with pytest.raises(DegenerateIterateError):
            row_normalize(gamma, np.array([0.5, 0.5]))
        with pytest.raises(DegenerateIterateError):
            col_normalize(gamma.T, np.array([0.5, 0.5]))

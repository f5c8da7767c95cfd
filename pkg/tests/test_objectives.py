import math

import numpy as np
import pytest

from mirror_sinkhorn import (
    SolverConfig,
    StepSchedule,
    TransportPolytope,
    entropic_ot_objective,
    estimate_lipschitz_bound,
    finite_difference_gradient,
    independent_coupling,
    inner_product_cost_oracle,
    kl_divergence,
    linear_objective,
    marginal_regularized,
    noisy_oracle,
    planted_strongly_convex,
    procrustes_objective,
    solve,
    subsampled_oracle,
)
from conftest import random_polytope, random_probability_matrix


def fd_check(objective, gamma, tol=1e-5):
    fd = finite_difference_gradient(objective.value, gamma)
    grad = objective.gradient(gamma)
    rel = np.abs(fd - grad) / np.maximum(1.0, np.abs(grad))
    assert rel.max() <= tol


class TestLinear:
    def test_zero_cost(self, rng):
        obj = linear_objective(np.zeros((3, 4)))
        assert obj.value(random_probability_matrix(rng, 3, 4)) == 0.0

    def test_zero_diagonal_at_diagonal_plan(self, rng):
        cost = rng.uniform(0, 1, (4, 4))
        np.fill_diagonal(cost, 0.0)
        mu = rng.dirichlet(np.ones(4))
        assert linear_objective(cost).value(np.diag(mu)) == 0.0

    def test_swap_cost_uniform(self):
        obj = linear_objective(np.array([[0.0, 1.0], [1.0, 0.0]]))
        assert obj.value(np.full((2, 2), 0.25)) == pytest.approx(0.5, rel=1e-15)

    def test_declared_bound(self):
        assert linear_objective(np.array([[0.2, -3.0]])).lipschitz_bound == 3.0

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            linear_objective(np.array([[np.inf]]))


class TestEntropic:
    def test_value_at_product_coupling(self, rng):
        p = random_polytope(rng, 4, 5)
        mu, nu = p.row_marginal, p.col_marginal
        obj = entropic_ot_objective(np.zeros((4, 5)), alpha=1.0)
        expected = float((mu * np.log(mu)).sum() + (nu * np.log(nu)).sum())
        assert obj.value(independent_coupling(p)) == pytest.approx(expected, rel=1e-12)

    def test_gradient_formula(self, rng):
        cost = rng.uniform(0, 1, (3, 3))
        obj = entropic_ot_objective(cost, alpha=0.7)
        gamma = random_probability_matrix(rng, 3, 3)
        assert np.allclose(obj.gradient(gamma), cost + 0.7 * (np.log(gamma) + 1.0), rtol=1e-14)

    def test_gradient_rejects_zero_entries(self):
        obj = entropic_ot_objective(np.zeros((2, 2)), alpha=1.0)
        with pytest.raises(ValueError):
            obj.gradient(np.array([[0.5, 0.5], [0.0, 0.0]]))

    def test_bregman_gap_is_alpha_times_relative_entropy(self, rng):
        alpha = 1.3
        obj = entropic_ot_objective(rng.uniform(0, 1, (3, 4)), alpha=alpha)
        for _ in range(20):
            a = random_probability_matrix(rng, 3, 4)
            b = random_probability_matrix(rng, 3, 4)
            gap = obj.value(a) - obj.value(b) - float((obj.gradient(b) * (a - b)).sum())
            assert gap == pytest.approx(alpha * kl_divergence(a, b), abs=1e-9)

    def test_rejects_nonpositive_alpha(self):
        with pytest.raises(ValueError):
            entropic_ot_objective(np.zeros((2, 2)), alpha=0.0)

    def test_pure_entropy_minimized_at_product_coupling(self, rng):
        p = random_polytope(rng, 3, 4)
        obj = entropic_ot_objective(np.zeros((3, 4)), alpha=1.0)
        config = SolverConfig(schedule=StepSchedule.inverse_t(1.0), horizon=2000)
        trace = solve(obj.as_oracle(), p, config)
        assert np.abs(trace.last_iterate - independent_coupling(p)).max() <= 1e-4


class TestProcrustes:
    def test_identity_matrices_leave_only_penalty(self, rng):
        obj = procrustes_objective(np.eye(3), np.eye(3), lam=2.0)
        gamma = random_probability_matrix(rng, 3, 3)
        assert obj.value(gamma) == pytest.approx(-2.0 * float((gamma**2).sum()), rel=1e-12)

    def test_planted_permutation_is_exact_registration(self, rng):
        n = 5
        k_x = rng.uniform(0, 1, (n, n))
        k_x = (k_x + k_x.T) / 2
        perm = rng.permutation(n)
        p_mat = np.zeros((n, n))
        p_mat[np.arange(n), perm] = 1.0
        k_y = p_mat.T @ k_x @ p_mat
        lam = 3.0
        obj = procrustes_objective(k_x, k_y, lam=lam)
        gamma = p_mat / n
        assert obj.value(gamma) == pytest.approx(-lam * float((gamma**2).sum()), abs=1e-12)

    def test_gradient_matches_finite_differences(self, rng):
        k_x = rng.uniform(0, 1, (4, 4)); k_x = (k_x + k_x.T) / 2
        k_y = rng.uniform(0, 1, (4, 4)); k_y = (k_y + k_y.T) / 2
        obj = procrustes_objective(k_x, k_y, lam=0.5)
        for _ in range(10):
            fd_check(obj, random_probability_matrix(rng, 4, 4))

    def test_convex_along_segments_below_threshold(self, rng):
        n = 4
        k_x = rng.uniform(0, 1, (n, n)); k_x = (k_x + k_x.T) / 2
        k_y = rng.uniform(0, 1, (n, n)); k_y = (k_y + k_y.T) / 2
        # The quadratic form is ||Q vec(gamma)||^2 with Q the commutation
        # operator; any lam below its smallest squared singular value keeps
        # the penalized objective convex.
        q = np.kron(np.eye(n), k_x) - np.kron(k_y.T, np.eye(n))
        lam = 0.9 * np.linalg.svd(q, compute_uv=False).min() ** 2
        obj = procrustes_objective(k_x, k_y, lam=float(lam))
        for _ in range(100):
            a = random_probability_matrix(rng, n, n)
            b = random_probability_matrix(rng, n, n)
            mid = obj.value((a + b) / 2)
            assert mid <= (obj.value(a) + obj.value(b)) / 2 + 1e-9

    def test_shape_validation(self):
        with pytest.raises(ValueError):
            procrustes_objective(np.zeros((2, 3)), np.zeros((3, 3)))
        with pytest.raises(ValueError):
            procrustes_objective(np.zeros((2, 2)), np.zeros((2, 2)), lam=-1.0)


class TestMarginalRegularized:
    def test_vanishes_on_feasible_plans(self, rng):
        p = random_polytope(rng, 3, 5)
        base = linear_objective(rng.uniform(0, 1, (3, 5)))
        wrapped = marginal_regularized(base, p, weight=2.0)
        gamma = independent_coupling(p)
        assert wrapped.value(gamma) == pytest.approx(base.value(gamma), rel=1e-14)
        assert np.allclose(wrapped.gradient(gamma), base.gradient(gamma), atol=1e-14)

    def test_penalty_value_at_doubled_product(self):
        p = TransportPolytope([0.5, 0.5], [0.5, 0.5])
        base = linear_objective(np.zeros((2, 2)))
        weight = 3.0
        wrapped = marginal_regularized(base, p, weight=weight)
        gamma = 2.0 * independent_coupling(p)
        # each marginal of 2 mu nu^T overshoots by mu (resp. nu)
        expected = weight * (float((p.row_marginal**2).sum())
                             + float((p.col_marginal**2).sum()))
        assert wrapped.value(gamma) == pytest.approx(expected, rel=1e-12)

    def test_gradient_matches_finite_differences(self, rng):
        p = random_polytope(rng, 3, 4)
        base = linear_objective(rng.uniform(0, 1, (3, 4)))
        wrapped = marginal_regularized(base, p, weight=1.5)
        for _ in range(5):
            fd_check(wrapped, random_probability_matrix(rng, 3, 4))


class TestPlanted:
    def test_minimum_value_is_zero_and_gap_nonnegative(self, rng):
        star = random_probability_matrix(rng, 4, 5)
        p = TransportPolytope(star.sum(axis=1), star.sum(axis=0))
        obj = planted_strongly_convex(p, star, alpha=2.0)
        assert obj.value(star) == pytest.approx(0.0, abs=1e-12)
        assert obj.optimum_value == 0.0
        for _ in range(20):
            gamma = random_probability_matrix(rng, 4, 5)
            assert obj.value(gamma) >= -1e-12

    def test_gradient_at_minimizer_is_constant_alpha(self, rng):
        alpha = 1.7
        star = random_probability_matrix(rng, 3, 3)
        p = TransportPolytope(star.sum(axis=1), star.sum(axis=0))
        obj = planted_strongly_convex(p, star, alpha=alpha)
        assert np.allclose(obj.gradient(star), alpha, rtol=1e-12)
        assert obj.lipschitz_bound == alpha

    def test_rejects_infeasible_or_boundary_plants(self, rng):
        p = random_polytope(rng, 3, 3)
        with pytest.raises(ValueError):
            planted_strongly_convex(p, random_probability_matrix(rng, 3, 3), 1.0)
        star = independent_coupling(p)
        star[0, 0] = 0.0
        with pytest.raises(ValueError):
            planted_strongly_convex(p, star, 1.0)

    def test_solver_recovers_planted_minimizer(self, rng):
        star = rng.uniform(0.5, 1.5, (5, 6))
        star /= star.sum()
        p = TransportPolytope(star.sum(axis=1), star.sum(axis=0))
        obj = planted_strongly_convex(p, star, alpha=1.0)
        config = SolverConfig(schedule=StepSchedule.inverse_t(1.0), horizon=3000)
        trace = solve(obj.as_oracle(), p, config, f_eval=obj.value)
        assert trace.f_values[-1] <= 1e-5
        assert np.abs(trace.output - star).sum() <= 1e-2


class TestFiniteDifferenceInvariant:
    def test_every_objective_family(self, rng):
        p = random_polytope(rng, 3, 4)
        cost = rng.uniform(0, 1, (3, 4))
        k = rng.uniform(0, 1, (4, 4)); k = (k + k.T) / 2
        star = random_probability_matrix(rng, 3, 4, concentration=5.0)
        p_star = TransportPolytope(star.sum(axis=1), star.sum(axis=0))
        objectives = [
            linear_objective(cost),
            entropic_ot_objective(cost, alpha=0.8),
            marginal_regularized(linear_objective(cost), p, weight=1.0),
            planted_strongly_convex(p_star, star, alpha=1.2),
        ]
        square = procrustes_objective(k, k + 0.1 * np.eye(4), lam=0.3)
        for obj in objectives:
            for _ in range(10):
                fd_check(obj, random_probability_matrix(rng, 3, 4, concentration=5.0))
        for _ in range(10):
            fd_check(square, random_probability_matrix(rng, 4, 4, concentration=5.0))


class TestSubsampledOracle:
    def test_full_support_is_exact(self, rng):
        cost = rng.uniform(0, 1, (3, 3))
        oracle = subsampled_oracle(linear_objective(cost), sample_size=9, seed=0,
                                   num_entries=9)
        gamma = random_probability_matrix(rng, 3, 3)
        assert np.array_equal(oracle(1, gamma), cost)
        assert oracle.noise_bound == 0.0

    def test_single_entry_draws_enumerate_support(self, rng):
        cost = np.full((2, 2), 0.5)
        oracle = subsampled_oracle(linear_objective(cost), sample_size=1, seed=3)
        gamma = np.full((2, 2), 0.25)
        allowed = [np.zeros((2, 2)) for _ in range(4)]
        for idx, (i, j) in enumerate([(0, 0), (0, 1), (1, 0), (1, 1)]):
            allowed[idx][i, j] = 4 * 0.5
        draws = np.stack([oracle(t, gamma) for t in range(4000)])
        for draw in draws[:50]:
            assert any(np.array_equal(draw, a) for a in allowed)
        assert np.allclose(draws.mean(axis=0), cost, atol=3 * 1.0 / math.sqrt(4000) + 1e-3)

    def test_unbiased_monte_carlo(self, rng):
        cost = rng.uniform(0, 1, (3, 3))
        oracle = subsampled_oracle(linear_objective(cost), sample_size=3, seed=11)
        gamma = random_probability_matrix(rng, 3, 3)
        draws = np.stack([oracle(t, gamma) for t in range(10_000)])
        se = draws.std(axis=0, ddof=1) / math.sqrt(draws.shape[0])
        assert np.all(np.abs(draws.mean(axis=0) - cost) <= 3 * se + 1e-12)

    def test_sample_size_validation(self, rng):
        with pytest.raises(ValueError):
            subsampled_oracle(linear_objective(np.zeros((2, 2))), sample_size=0, seed=0)
        oracle = subsampled_oracle(linear_objective(np.zeros((2, 2))), sample_size=5, seed=0)
        with pytest.raises(ValueError):
            oracle(1, np.full((2, 2), 0.25))


class TestNoisyOracle:
    def test_zero_sigma_is_base(self, rng):
        cost = rng.uniform(0, 1, (3, 3))
        oracle = noisy_oracle(linear_objective(cost), sigma=0.0, seed=0)
        assert oracle.deterministic
        assert np.array_equal(oracle(1, np.full((3, 3), 1 / 9)), cost)

    def test_bounded_noise_and_unbiased_mean(self, rng):
        cost = rng.uniform(0, 1, (2, 3))
        sigma = 0.4
        oracle = noisy_oracle(linear_objective(cost), sigma=sigma, seed=5)
        gamma = random_probability_matrix(rng, 2, 3)
        draws = np.stack([oracle(t, gamma) for t in range(10_000)])
        deviations = np.abs(draws - cost)
        assert deviations.max() <= sigma  # sup-norm bounded almost surely
        se = draws.std(axis=0, ddof=1) / math.sqrt(draws.shape[0])
        assert np.all(np.abs(draws.mean(axis=0) - cost) <= 3 * se + 1e-12)

    def test_declared_noise_feeds_schedules(self):
        oracle = noisy_oracle(linear_objective(np.ones((2, 2))), sigma=0.3, seed=0)
        sch = StepSchedule.anytime_sqrt(oracle.lipschitz_bound, 1.0,
                                        noise_bound=oracle.noise_bound)
        assert sch.eta(1) == pytest.approx(1.0 / math.hypot(1.0, 0.3), rel=1e-14)


class TestInnerProductOracle:
    def test_zero_variance_gives_exact_cost(self, rng):
        x = rng.standard_normal((3, 2))
        y = rng.standard_normal((4, 2))
        oracle = inner_product_cost_oracle(lambda r: x, lambda r: y, seed=0)
        assert np.allclose(oracle(1, None), -(x @ y.T), rtol=1e-14)

    def test_unbiased_one_dimensional(self, rng):
        x_mean = np.array([[1.5], [-0.5]])
        y = np.array([[2.0], [0.5]])
        a = 0.7
        oracle = inner_product_cost_oracle(
            lambda r: x_mean + r.uniform(-a, a, x_mean.shape), lambda r: y, seed=9)
        draws = np.stack([oracle(t, None) for t in range(10_000)])
        expected = -(x_mean @ y.T)
        se = draws.std(axis=0, ddof=1) / math.sqrt(draws.shape[0])
        assert np.all(np.abs(draws.mean(axis=0) - expected) <= 3 * se + 1e-12)


class TestLipschitzEstimate:
    def test_linear_objective_recovers_sup_norm(self, rng):
        cost = rng.uniform(0, 1, (4, 4))
        obj = linear_objective(cost)
        assert estimate_lipschitz_bound(obj, (4, 4)) == pytest.approx(float(np.abs(cost).max()))

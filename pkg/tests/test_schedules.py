import math

import pytest

from mirror_sinkhorn import ConfigurationError, StepSchedule, min_horizon_for_epsilon


class TestEta:
    def test_anytime_unit_parameters(self):
        sch = StepSchedule.anytime_sqrt(1.0, 1.0)
        assert sch.eta(1) == pytest.approx(1.0, rel=1e-15)

    def test_anytime_formula(self):
        sch = StepSchedule.anytime_sqrt(2.0, 9.2103)
        assert sch.eta(100) == pytest.approx(0.5 * math.sqrt(9.2103 / 100), rel=1e-14)

    def test_inverse_t(self):
        assert StepSchedule.inverse_t(0.5).eta(4) == pytest.approx(0.5, rel=1e-15)

    def test_ot_constant_epsilon(self):
        sch = StepSchedule.ot_constant_epsilon(0.1, 4.0)
        assert sch.eta(1) == pytest.approx(0.2, rel=1e-15)
        assert sch.eta(17) == sch.eta(1)

    def test_constant_horizon(self):
        sch = StepSchedule.constant_horizon(2.0, 3.0, horizon=600, noise_bound=0.0)
        assert sch.eta(5) == pytest.approx(0.5 * math.sqrt(6.0 / 600), rel=1e-14)

    def test_noise_folds_into_bound(self):
        sch = StepSchedule.anytime_sqrt(3.0, 2.0, noise_bound=4.0)
        assert sch.eta(1) == pytest.approx(math.sqrt(2.0) / 5.0, rel=1e-14)

    def test_user_constant(self):
        sch = StepSchedule.user_constant(0.37)
        assert sch.eta(1) == sch.eta(10**6) == 0.37

    def test_t_below_one_rejected(self):
        with pytest.raises(ValueError):
            StepSchedule.inverse_t(1.0).eta(0)


class TestScheduleProperties:
    def test_decaying_kinds_strictly_decreasing(self):
        for sch in (StepSchedule.anytime_sqrt(1.0, 2.0),
                    StepSchedule.ot_anytime(2.0, noise_bound=0.5),
                    StepSchedule.inverse_t(0.7)):
            etas = [sch.eta(t) for t in (1, 2, 5, 17, 400, 10**6)]
            assert all(a > b for a, b in zip(etas, etas[1:]))

    def test_constant_kinds_constant(self):
        for sch in (StepSchedule.constant_horizon(1.0, 1.0, horizon=100),
                    StepSchedule.ot_constant_epsilon(0.2, 1.0),
                    StepSchedule.user_constant(1.0)):
            assert sch.eta(1) == sch.eta(99)

    def test_anytime_matches_ot_kind_at_unit_bound(self):
        for sigma in (0.0, 0.3, 2.0):
            a = StepSchedule.anytime_sqrt(1.0, 3.7, noise_bound=sigma)
            b = StepSchedule.ot_anytime(3.7, noise_bound=sigma)
            for t in (1, 2, 10, 1234, 10**9):
                assert a.eta(t) == pytest.approx(b.eta(t), rel=1e-14)

    def test_finite_positive_far_out(self):
        for sch in (StepSchedule.anytime_sqrt(1.0, 1.0),
                    StepSchedule.ot_anytime(9.0),
                    StepSchedule.inverse_t(2.0)):
            eta = sch.eta(10**9)
            assert math.isfinite(eta) and eta > 0.0


class TestValidation:
    def test_unknown_kind(self):
        with pytest.raises(ConfigurationError):
            StepSchedule("linesearch")

    def test_missing_parameter(self):
        with pytest.raises(ConfigurationError):
            StepSchedule("anytime_sqrt", lipschitz_bound=1.0)  # no radius
        with pytest.raises(ConfigurationError):
            StepSchedule("inverse_t")
        with pytest.raises(ConfigurationError):
            StepSchedule("ot_constant_epsilon", epsilon=0.1)

    def test_nonpositive_parameter(self):
        with pytest.raises(ConfigurationError):
            StepSchedule.anytime_sqrt(0.0, 1.0)
        with pytest.raises(ConfigurationError):
            StepSchedule.inverse_t(-1.0)

    def test_nan_noise_rejected(self):
        with pytest.raises(ConfigurationError):
            StepSchedule.anytime_sqrt(1.0, 1.0, noise_bound=math.nan)


class TestMinHorizon:
    def test_unit_parameters(self):
        assert min_horizon_for_epsilon(1.0, 0.0, 1.0) == 5

    def test_formula(self):
        assert min_horizon_for_epsilon(0.1, 0.0, 2 * math.log(5)) == 1610

    def test_with_noise(self):
        assert min_horizon_for_epsilon(0.5, 1.0, 1.0) == 40

    def test_rejects_bad_inputs(self):
        with pytest.raises(ValueError):
            min_horizon_for_epsilon(0.0, 0.0, 1.0)
        with pytest.raises(ValueError):
            min_horizon_for_epsilon(0.1, 0.0, 0.0)

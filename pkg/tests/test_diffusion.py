import numpy as np
import pytest

from vcdc.channel import noise_scale
from vcdc.diffusion import (DiffusionSchedule, TransitionParams, build_schedule,
                            forward_transition, reverse_step)

RATE_121_60 = 60 / 121


class TestBuildSchedule:
    def test_single_level_equals_observed(self):
        sched = build_schedule(4.0, 1, 0.5, 0.5)
        assert sched.csnr_levels.tolist() == [4.0]
        assert sched.observed_csnr_db == 4.0

    def test_default_shape_t20(self):
        sched = build_schedule(4.0, 20, 0.5, RATE_121_60)
        assert len(sched) == 20
        assert sched.csnr_levels[0] == pytest.approx(13.5)
        assert sched.csnr_levels[-1] == pytest.approx(4.0)
        assert (np.diff(sched.csnr_levels) < 0).all()
        vsnr = sched.vsnr()
        assert (np.diff(vsnr) < 0).all()

    def test_adjacent_transitions_have_positive_variance(self):
        sched = build_schedule(4.0, 20, 0.5, RATE_121_60)
        for t in range(1, len(sched)):
            assert forward_transition(sched, t - 1, t).variance > 0

    def test_rejects_bad_parameters(self):
        with pytest.raises(ValueError):
            build_schedule(4.0, 0, 0.5, 0.5)
        with pytest.raises(ValueError):
            build_schedule(4.0, 5, -0.1, 0.5)
        with pytest.raises(ValueError):
            DiffusionSchedule(csnr_levels=np.array([4.0, 5.0]), rate=0.5)

    def test_alpha_sigma_match_channel_law(self):
        sched = build_schedule(4.0, 8, 0.75, RATE_121_60)
        for level, alpha, sigma in zip(sched.csnr_levels, sched.alphas, sched.sigmas):
            w = noise_scale(level, 60, 121)
            assert alpha == pytest.approx(2.0 / w**2, rel=1e-12)
            assert sigma == pytest.approx(2.0 / w, rel=1e-12)
            assert alpha**2 / sigma**2 == pytest.approx(1.0 / w**2, rel=1e-12)


class TestForwardTransition:
    def test_same_level_rejected(self):
        sched = build_schedule(4.0, 5, 0.5, 0.5)
        with pytest.raises(ValueError):
            forward_transition(sched, 2, 2)

    def test_toward_higher_csnr_rejected(self):
        sched = build_schedule(4.0, 5, 0.5, 0.5)
        with pytest.raises(ValueError):
            forward_transition(sched, 3, 1)

    def test_frozen_values_121_60_6db_to_4db(self):
        sched = DiffusionSchedule(csnr_levels=np.array([6.0, 4.0]), rate=RATE_121_60)
        params = forward_transition(sched, 0, 1)
        assert isinstance(params, TransitionParams)
        # 40-digit oracle: ratio = w6^2/w4^2 = 10^-0.2, variance from the
        # conditional-variance formula
        assert params.alpha_ratio == pytest.approx(0.63095734448, abs=1e-9)
        assert params.variance == pytest.approx(3.6773285516, abs=1e-8)
        assert params.variance > 0

    def test_validity_equivalent_to_decreasing_csnr(self):
        rng = np.random.default_rng(5)
        for _ in range(200):
            s_db, t_db = rng.uniform(-2, 12, 2)
            if s_db == t_db:
                continue
            rate = rng.uniform(0.05, 0.95)
            hi, lo = max(s_db, t_db), min(s_db, t_db)
            sched = DiffusionSchedule(csnr_levels=np.array([hi, lo]), rate=rate)
            assert forward_transition(sched, 0, 1).variance > 0
            # reversing direction is exactly the invalid case
            with pytest.raises(ValueError):
                forward_transition(sched, 1, 0)

    def test_two_step_composition_matches_direct_marginal(self):
        sched = DiffusionSchedule(csnr_levels=np.array([8.0, 6.0, 4.0]), rate=0.5)
        rng = np.random.default_rng(9)
        nsamples = 10**6
        x = 1.0
        a, s = sched.alphas, sched.sigmas
        z0 = a[0] * x + s[0] * rng.standard_normal(nsamples)
        p01 = forward_transition(sched, 0, 1)
        z1 = p01.alpha_ratio * z0 + np.sqrt(p01.variance) * rng.standard_normal(nsamples)
        p12 = forward_transition(sched, 1, 2)
        z2 = p12.alpha_ratio * z1 + np.sqrt(p12.variance) * rng.standard_normal(nsamples)
        mean_target, var_target = a[2] * x, s[2]**2
        se_mean = np.sqrt(var_target / nsamples)
        se_var = var_target * np.sqrt(2.0 / nsamples)
        assert abs(z2.mean() - mean_target) < 3 * se_mean
        assert abs(z2.var() - var_target) < 3 * se_var


class TestReverseStep:
    def test_zero_estimate_leaves_state_unchanged(self):
        sched = build_schedule(4.0, 6, 0.5, 0.5)
        z = np.array([1.0, -2.0, 0.5])
        out = reverse_step(sched, 3, z, np.zeros(3))
        np.testing.assert_array_equal(out, z)

    def test_scalar_example_w_half_to_one(self):
        # levels chosen so the scales are w=0.5 and w=1.0 at rate 1/2:
        # z_s = 1 + (2/0.25 - 2/1) * 1 = 7
        step = 10 * np.log10(4.0)
        sched = build_schedule(0.0, 2, step, 0.5)
        out = reverse_step(sched, 1, np.array([1.0]), np.array([1.0]))
        assert out[0] == pytest.approx(7.0, rel=1e-12)

    def test_telescoping_with_constant_estimate(self):
        sched = build_schedule(4.0, 20, 0.5, RATE_121_60)
        rng = np.random.default_rng(3)
        z = rng.normal(0, 3, 11)
        x_hat = rng.uniform(-1, 1, 11)
        cur = z.copy()
        for t in range(len(sched) - 1, 0, -1):
            cur = reverse_step(sched, t, cur, x_hat)
        expected = z + (sched.alphas[0] - sched.alphas[-1]) * x_hat
        np.testing.assert_allclose(cur, expected, rtol=1e-10, atol=1e-10)

    def test_rejects_stepping_past_start(self):
        sched = build_schedule(4.0, 3, 0.5, 0.5)
        with pytest.raises(ValueError):
            reverse_step(sched, 0, np.zeros(2), np.zeros(2))

    def test_rejects_out_of_range_estimate(self):
        sched = build_schedule(4.0, 3, 0.5, 0.5)
        with pytest.raises(ValueError):
            reverse_step(sched, 1, np.zeros(2), np.array([1.5, 0.0]))

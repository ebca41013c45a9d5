import numpy as np
import pytest
from scipy.stats import norm

from models.calibration import CalibrationResult
from models.lambda_seq import LambdaSeq
from models.prior import PriorSpec
from models.se import SeConfig
from services.calibration import Calibrator, alpha_of_lambda, lambda_of_alpha
from utils.errors import ConfigError, NoBracket, NonMonotoneSign


def lasso_lambda(a, sigma_w, delta):
    """lambda(alpha) for constant alpha = a and a null signal, in closed form"""
    risk = 2.0 * ((1.0 + a * a) * norm.cdf(-a) - a * norm.pdf(a))
    tau = sigma_w / np.sqrt(1.0 - risk / delta)
    return a * tau * (1.0 - 2.0 * norm.cdf(-a) / delta)


def small_config(**overrides):
    settings = dict(p_se=200, mc_reps=16, seed=0, sigma_w=0.2, delta=0.5)
    settings.update(overrides)
    return SeConfig(**settings)


class TestLambdaOfAlpha:
    def test_large_alpha_keeps_full_noise_level(self, bg_prior):
        result = Calibrator(bg_prior, small_config()).lambda_of_alpha(LambdaSeq.constant(200, 50.0))
        assert result.scale == pytest.approx(np.sqrt(result.tau_star_sq), rel=1e-12)
        np.testing.assert_allclose(result.lambda_check, 50.0 * result.scale)

    def test_increasing_along_a_ray(self, bg_prior):
        calibrator = Calibrator(bg_prior, small_config())
        direction = LambdaSeq.linear(200, 1.0, 0.5)
        a_star = calibrator.se.alpha_min_scale(direction)
        firsts = [calibrator.lambda_of_alpha(direction.scaled(k * a_star)).lambda_check[0]
                  for k in (1.5, 2.0, 3.0)]
        assert firsts[0] < firsts[1] < firsts[2]

    def test_lasso_closed_form(self):
        cfg = small_config(p_se=1000, mc_reps=32, sigma_w=1.0)
        result = lambda_of_alpha(LambdaSeq.constant(1000, 1.5), PriorSpec.point_mass(0.0), cfg)
        assert result.lambda_check[0] == pytest.approx(lasso_lambda(1.5, 1.0, 0.5), rel=0.02)
        assert result.mc_stderr > 0

    def test_adjusts_dimension(self, bg_prior):
        result = lambda_of_alpha(LambdaSeq.constant(150, 2.0), bg_prior, small_config())
        assert len(result.lambda_check) == 150


class TestAlphaOfLambda:
    @pytest.mark.parametrize('lam', [
        LambdaSeq.constant(200, 0.3),
        LambdaSeq.linear(200, 0.6, 0.2),
        LambdaSeq.bhq(200, 0.2, scale=0.2),
    ])
    def test_roundtrip(self, bg_prior, lam):
        result = Calibrator(bg_prior, small_config()).alpha_of_lambda(lam)
        # bisection stops at a relative width of 1e-3 on the scale
        slack = 3 * result.lambda_stderr + 5e-3 * lam.values
        assert np.all(np.abs(result.lambda_check - lam.values) <= slack)
        np.testing.assert_allclose(result.alpha.values / result.alpha.max, lam.values / lam.max)

    def test_lasso_inverse(self):
        cfg = small_config(p_se=1000, mc_reps=32, sigma_w=1.0)
        lam = LambdaSeq.constant(1000, lasso_lambda(1.5, 1.0, 0.5))
        result = alpha_of_lambda(lam, PriorSpec.point_mass(0.0), cfg)
        assert result.alpha.max == pytest.approx(1.5, rel=0.03)

    def test_zero_weight_rejected(self, bg_prior):
        lam = LambdaSeq(np.r_[np.full(199, 0.5), 0.0])
        with pytest.raises(ConfigError):
            Calibrator(bg_prior, small_config()).alpha_of_lambda(lam)

    def test_length_mismatch_rejected(self, bg_prior):
        with pytest.raises(ConfigError):
            Calibrator(bg_prior, small_config()).alpha_of_lambda(LambdaSeq.constant(50, 1.0))

    def test_no_bracket(self, bg_prior):
        with pytest.raises(NoBracket):
            Calibrator(bg_prior, small_config()).alpha_of_lambda(LambdaSeq.constant(200, 1e6), max_doublings=1)

    def test_result_roundtrips_through_dict(self, bg_prior):
        result = Calibrator(bg_prior, small_config()).alpha_of_lambda(LambdaSeq.constant(200, 0.3))
        restored = CalibrationResult.from_dict(result.to_dict())
        np.testing.assert_array_equal(restored.alpha.values, result.alpha.values)
        assert restored.scale == result.scale
        assert restored.tau_star_sq == result.tau_star_sq


def scripted_calibrator(monkeypatch, first_entry):
    """Calibrator whose lambda(a l) has first entry first_entry(a), A_min scale 1 and no MC noise"""
    calibrator = Calibrator(PriorSpec.bernoulli_gaussian(0.1, 1.0), small_config(p_se=4))
    monkeypatch.setattr(calibrator.se, 'alpha_min_scale', lambda direction: 1.0)

    def fake_lambda_of_alpha(alpha, tau0_sq=None):
        alpha = np.asarray(alpha, dtype=float)
        scale = first_entry(alpha[0]) / alpha[0]
        return CalibrationResult(LambdaSeq(alpha, penalty=False), scale, 1.0, alpha * scale, 0.0)

    monkeypatch.setattr(calibrator, 'lambda_of_alpha', fake_lambda_of_alpha)
    return calibrator


class TestMonotonicity:
    def test_decreasing_lambda_is_rejected(self, monkeypatch):
        calibrator = scripted_calibrator(monkeypatch, lambda a: 6.0 - 2.0 * a)
        with pytest.raises(NonMonotoneSign):
            calibrator.alpha_of_lambda(LambdaSeq.constant(4, 1.0))

    def test_increasing_lambda_is_inverted(self, monkeypatch):
        calibrator = scripted_calibrator(monkeypatch, lambda a: a - 0.5)
        result = calibrator.alpha_of_lambda(LambdaSeq.constant(4, 1.0), rtol=1e-6)
        assert result.alpha.values[0] == pytest.approx(1.5, rel=1e-5)

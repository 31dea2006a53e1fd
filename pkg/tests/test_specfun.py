import math

import numpy as np
import pytest
from scipy.special import digamma as sp_digamma
from scipy.special import gammaln

from app.core.exceptions import DomainError
from app.core.specfun import (
    ALZER_LAMBDA,
    EULER_GAMMA,
    alzer_lower_bound,
    digamma,
    digamma1p_series,
    digamma_upper_bound,
    duplication_residual,
    exp_series,
    log_gamma,
    log_gamma1p_series,
)


def test_log_gamma_matches_scipy():
    x = np.geomspace(1e-3, 500.0, 400)
    np.testing.assert_allclose(log_gamma(x), gammaln(x), rtol=1e-12, atol=1e-13)


def test_log_gamma_known_values():
    assert log_gamma(1.0) == pytest.approx(0.0, abs=1e-14)
    assert log_gamma(2.0) == pytest.approx(0.0, abs=1e-14)
    assert log_gamma(0.5) == pytest.approx(0.5 * math.log(math.pi), rel=1e-13)
    assert log_gamma(5.0) == pytest.approx(math.log(24.0), rel=1e-13)


def test_log_gamma_scalar_returns_float():
    assert isinstance(log_gamma(3.0), float)


@pytest.mark.parametrize("bad", [0.0, -1.0, float("nan")])
def test_log_gamma_rejects_non_positive(bad):
    with pytest.raises(DomainError):
        log_gamma(bad)


def test_digamma_matches_scipy():
    x = np.geomspace(1e-3, 1e4, 300)
    np.testing.assert_allclose(digamma(x), sp_digamma(x), rtol=1e-12, atol=1e-12)


def test_digamma_at_one_is_minus_euler():
    assert digamma(1.0) == pytest.approx(-EULER_GAMMA, abs=1e-14)


def test_alzer_bound_below_gamma_above_one():
    x = np.concatenate([np.linspace(1.0, 20.0, 200), np.geomspace(20.0, 100.0, 100)])
    assert np.all(alzer_lower_bound(x) <= np.exp(gammaln(x)) * (1.0 + 1e-12))


def test_alzer_bound_fails_below_one():
    assert alzer_lower_bound(0.5) > math.exp(gammaln(0.5))


def test_alzer_lambda_value():
    assert ALZER_LAMBDA == pytest.approx((math.pi ** 2 / 6.0 - EULER_GAMMA) / 2.0, rel=1e-15)


def test_duplication_formula_residual_vanishes():
    z = np.linspace(0.1, 50.0, 100)
    np.testing.assert_allclose(duplication_residual(z), 0.0, atol=1e-11)


def test_digamma_upper_bound_above_one():
    x = np.linspace(1.01, 100.0, 200)
    assert np.all(digamma_upper_bound(x) > sp_digamma(x))


def test_log_gamma1p_series_near_zero():
    coef = log_gamma1p_series(14)
    x = np.linspace(-0.05, 0.05, 21)
    approx = np.polyval(coef[::-1], x)
    np.testing.assert_allclose(approx, gammaln(1.0 + x), atol=1e-15)


def test_digamma1p_series_near_zero():
    coef = digamma1p_series(14)
    x = np.linspace(-0.05, 0.05, 21)
    np.testing.assert_allclose(np.polyval(coef[::-1], x), sp_digamma(1.0 + x), atol=1e-14)


def test_exp_series_gives_gamma():
    coef = exp_series(log_gamma1p_series(14))
    x = 0.03
    assert np.polyval(coef[::-1], x) == pytest.approx(math.exp(gammaln(1.0 + x)), rel=1e-14)


def test_series_order_limits():
    with pytest.raises(DomainError):
        log_gamma1p_series(40)
    with pytest.raises(DomainError):
        digamma1p_series(40)

import math
import warnings

import numpy as np
import pytest
from scipy import stats
from scipy.integrate import quad

from app.core.exceptions import DomainError, MomentNotFiniteError
from app.schemas.params import GevParams, GpParams
from app.services.evd_service import (
    gev_cdf,
    gev_logpdf,
    gev_quantile,
    gev_sample,
    gp_cdf,
    gp_logpdf,
    gp_moment,
    gp_negpower_moment,
    gp_quantile,
    gp_sample,
)


@pytest.mark.parametrize("xi", [-0.4, -1e-8, 0.0, 0.3, 1.5])
def test_gp_logpdf_matches_scipy(xi):
    params = GpParams(sigma=2.0, xi=xi)
    z = np.array([0.1, 0.5, 1.0, 2.5])
    expected = stats.genpareto.logpdf(z, c=xi, scale=2.0)
    np.testing.assert_allclose(gp_logpdf(z, params), expected, rtol=1e-7)


def test_gp_logpdf_off_support():
    params = GpParams(sigma=1.0, xi=-0.5)
    assert gp_logpdf(-1.0, params) == -np.inf
    # upper endpoint -sigma/xi = 2
    assert gp_logpdf(2.5, params) == -np.inf


@pytest.mark.parametrize("xi", [-0.3, 0.0, 0.2])
def test_gev_logpdf_matches_scipy(xi):
    params = GevParams(mu=1.0, sigma=2.0, xi=xi)
    y = np.array([-1.0, 0.5, 1.0, 3.0])
    # scipy's shape has the opposite sign
    expected = stats.genextreme.logpdf(y, c=-xi, loc=1.0, scale=2.0)
    np.testing.assert_allclose(gev_logpdf(y, params), expected, rtol=1e-7)


def test_gev_cdf_outside_support():
    assert gev_cdf(-10.0, GevParams(mu=0.0, sigma=1.0, xi=0.5)) == 0.0
    assert gev_cdf(10.0, GevParams(mu=0.0, sigma=1.0, xi=-0.5)) == 1.0


@pytest.mark.parametrize("xi", [-0.4, 0.0, 0.25])
def test_quantile_inverts_cdf(xi):
    q = np.array([0.01, 0.3, 0.5, 0.9, 0.999])
    gp = GpParams(sigma=1.5, xi=xi)
    np.testing.assert_allclose(gp_cdf(gp_quantile(q, gp), gp), q, rtol=1e-10)
    gev = GevParams(mu=-1.0, sigma=1.5, xi=xi)
    np.testing.assert_allclose(gev_cdf(gev_quantile(q, gev), gev), q, rtol=1e-10)


def test_gumbel_quantile_grows_like_log_period():
    params = GevParams(mu=0.0, sigma=1.0, xi=0.0)
    T = 1e6
    assert gev_quantile(1.0 - 1.0 / T, params) == pytest.approx(math.log(T), rel=1e-6)


@pytest.mark.parametrize("q", [0.0, 1.0, -0.1, 1.2])
def test_quantile_rejects_bad_probability(q):
    with pytest.raises(DomainError):
        gp_quantile(q, GpParams(sigma=1.0, xi=0.1))


def test_sampling_is_seeded():
    params = GpParams(sigma=2.0, xi=0.2)
    a = gp_sample(params, 50, np.random.default_rng(7))
    b = gp_sample(params, 50, np.random.default_rng(7))
    np.testing.assert_array_equal(a, b)
    assert np.all(a > 0.0)


def test_gev_sample_mean(rng):
    params = GevParams(mu=0.0, sigma=1.0, xi=0.0)
    draws = gev_sample(params, 20000, rng)
    assert draws.mean() == pytest.approx(0.5772156649, abs=0.05)


def test_sample_count_must_be_positive():
    with pytest.raises(DomainError):
        gp_sample(GpParams(sigma=1.0, xi=0.0), 0)


def test_gp_moments():
    params = GpParams(sigma=2.0, xi=0.2)
    assert gp_moment(1, params) == pytest.approx(2.0 / 0.8)
    assert gp_moment(2, params) == pytest.approx(2.0 * 4.0 / (0.8 * 0.6))
    with pytest.raises(MomentNotFiniteError):
        gp_moment(5, params)


def test_gp_negpower_moment_matches_quadrature():
    params = GpParams(sigma=1.5, xi=-0.25)
    a = 0.5
    power = -a / params.xi
    upper = -params.sigma / params.xi
    expected, _ = quad(lambda z: z ** power * math.exp(gp_logpdf(z, params)), 0.0, upper)
    assert gp_negpower_moment(a, params) == pytest.approx(expected, rel=1e-8)


def test_gp_negpower_moment_domain():
    with pytest.raises(DomainError):
        gp_negpower_moment(0.5, GpParams(sigma=1.0, xi=0.1))


XI_GRID = [-1.5, -1.0, -0.5, -0.1, 0.0, 0.1, 0.5, 1.5]


@pytest.mark.parametrize("xi", XI_GRID)
def test_gp_density_integrates_to_one(xi):
    params = GpParams(sigma=2.0, xi=xi)
    density = lambda z: math.exp(gp_logpdf(z, params))
    if xi < 0.0:
        total, _ = quad(density, 0.0, -params.sigma / xi, epsabs=1e-12, epsrel=1e-10, limit=200)
    else:
        head, _ = quad(density, 0.0, params.sigma, epsabs=1e-12, epsrel=1e-10, limit=200)
        tail, _ = quad(density, params.sigma, np.inf, epsabs=1e-12, epsrel=1e-10, limit=200)
        total = head + tail
    assert total == pytest.approx(1.0, abs=1e-7)


@pytest.mark.parametrize("xi", XI_GRID)
def test_gev_density_integrates_to_one(xi):
    params = GevParams(mu=1.0, sigma=2.0, xi=xi)
    density = lambda y: math.exp(gev_logpdf(y, params))
    opts = dict(epsabs=1e-12, epsrel=1e-10, limit=200)
    if xi > 0.0:
        endpoint = params.mu - params.sigma / xi
        head, _ = quad(density, endpoint, params.mu, **opts)
        tail, _ = quad(density, params.mu, np.inf, **opts)
    elif xi < 0.0:
        endpoint = params.mu - params.sigma / xi
        head, _ = quad(density, -np.inf, params.mu, **opts)
        tail, _ = quad(density, params.mu, endpoint, **opts)
    else:
        head, _ = quad(density, -np.inf, params.mu, **opts)
        tail, _ = quad(density, params.mu, np.inf, **opts)
    assert head + tail == pytest.approx(1.0, abs=1e-7)


def test_gp_shape_minus_one_is_uniform():
    assert gp_logpdf(0.3, GpParams(sigma=2.0, xi=-1.0)) == pytest.approx(-math.log(2.0), abs=1e-12)


def test_gp_logpdf_heavy_tail_value():
    expected = math.log(0.5 * 1.25 ** -3)
    assert gp_logpdf(1.0, GpParams(sigma=2.0, xi=0.5)) == pytest.approx(expected, rel=1e-12)


def test_logpdf_continuous_through_zero_shape():
    z = np.linspace(0.05, 10.0, 20)
    gap = np.abs(gp_logpdf(z, GpParams(sigma=1.0, xi=1e-7)) - gp_logpdf(z, GpParams(sigma=1.0, xi=0.0)))
    assert gap.max() <= 1e-5
    y = np.linspace(-2.0, 8.0, 20)
    gap = np.abs(
        gev_logpdf(y, GevParams(mu=0.0, sigma=1.0, xi=1e-7))
        - gev_logpdf(y, GevParams(mu=0.0, sigma=1.0, xi=0.0))
    )
    assert gap.max() <= 1e-5


def test_gev_logpdf_far_below_mode_is_quiet():
    params = GevParams(mu=0.0, sigma=1.0, xi=0.0)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert gev_logpdf(-1000.0, params) == -np.inf
        assert gev_cdf(-1000.0, params) == 0.0


def test_gp_sample_within_ks_band(rng):
    params = GpParams(sigma=2.0, xi=0.2)
    draws = gp_sample(params, 100_000, rng)
    result = stats.kstest(draws, lambda z: gp_cdf(z, params))
    assert result.pvalue > 0.01


def test_gev_sample_within_ks_band(rng):
    params = GevParams(mu=1.0, sigma=0.5, xi=-0.2)
    draws = gev_sample(params, 100_000, rng)
    result = stats.kstest(draws, lambda y: gev_cdf(y, params))
    assert result.pvalue > 0.01


@pytest.mark.parametrize("r", [1, 2, 3])
@pytest.mark.parametrize("xi", [-0.5, 0.0, 0.2])
def test_gp_moment_matches_quadrature(r, xi):
    params = GpParams(sigma=1.5, xi=xi)
    upper = -params.sigma / xi if xi < 0.0 else np.inf
    expected, _ = quad(
        lambda z: z ** r * math.exp(gp_logpdf(z, params)), 0.0, upper,
        epsabs=0.0, epsrel=1e-10, limit=200,
    )
    assert gp_moment(r, params) == pytest.approx(expected, rel=1e-6)


def test_gp_moment_boundary_shape():
    with pytest.raises(MomentNotFiniteError):
        gp_moment(2, GpParams(sigma=1.0, xi=0.5))


@pytest.mark.parametrize("a, xi", [(1.0, -0.5), (2.0, -0.5), (2.0, -1.25)])
def test_gp_negpower_moment_grid(a, xi):
    params = GpParams(sigma=1.0, xi=xi)
    power = -a / xi
    expected, _ = quad(
        lambda z: z ** power * math.exp(gp_logpdf(z, params)), 0.0, -params.sigma / xi,
        epsabs=0.0, epsrel=1e-10, limit=200,
    )
    assert gp_negpower_moment(a, params) == pytest.approx(expected, rel=1e-6)


def test_gp_negpower_moment_of_order_zero_is_one():
    assert gp_negpower_moment(0.0, GpParams(sigma=1.0, xi=-0.5)) == pytest.approx(1.0, rel=1e-12)

"""
Generalized Pareto and GEV distributions: densities, distribution
functions, quantiles, simulation by inversion and the GP moment formulas.

Functions accept scalars or numpy arrays for the observation argument and
return a float for scalar input. For |xi| below XI_SWITCH the removable
singularity at xi = 0 is handled by the two-term expansion
(1/xi) log(1 + xi w) ~ w - xi w^2 / 2.
"""
import logging
import math
from typing import Union

import numpy as np

from app.core.exceptions import DomainError, MomentNotFiniteError
from app.core.specfun import log_gamma
from app.schemas.params import GevParams, GpParams

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]
RngLike = Union[np.random.Generator, int, None]

XI_SWITCH = 1e-6


def _out(arr: np.ndarray, x: ArrayLike) -> ArrayLike:
    return float(arr) if np.ndim(x) == 0 else arr


def _check_scale(sigma: float) -> None:
    if not (math.isfinite(sigma) and sigma > 0.0):
        raise DomainError(f"scale must be positive and finite, got {sigma}")


def log1p_over_xi(w: np.ndarray, xi: float) -> np.ndarray:
    """(1/xi) log(1 + xi w), continuous through xi = 0. Caller guarantees 1 + xi w > 0."""
    if abs(xi) < XI_SWITCH:
        return w - 0.5 * xi * w * w
    return np.log1p(xi * w) / xi


def expm1_over_xi(a: np.ndarray, xi: float) -> np.ndarray:
    """(exp(xi a) - 1) / xi, continuous through xi = 0."""
    if abs(xi) < XI_SWITCH:
        return a + 0.5 * xi * a * a
    return np.expm1(xi * a) / xi


def gp_logpdf_raw(z: ArrayLike, sigma: float, xi: float) -> ArrayLike:
    """GP log density on raw floats; -inf off the support."""
    _check_scale(sigma)
    zz = np.asarray(z, dtype=float)
    w = zz / sigma
    t = 1.0 + xi * w
    ok = (zz >= 0.0) & (t > 0.0)
    out = np.full(zz.shape, -np.inf)
    if np.any(ok):
        wo = w[ok]
        out[ok] = -math.log(sigma) - np.log1p(xi * wo) - log1p_over_xi(wo, xi)
    return _out(out, z)


def gp_cdf_raw(z: ArrayLike, sigma: float, xi: float) -> ArrayLike:
    _check_scale(sigma)
    zz = np.asarray(z, dtype=float)
    w = np.maximum(zz, 0.0) / sigma
    t = 1.0 + xi * w
    out = np.ones(zz.shape)
    inside = t > 0.0
    out[inside] = -np.expm1(-log1p_over_xi(w[inside], xi))
    out[zz <= 0.0] = 0.0
    return _out(out, z)


def _check_probability(q: ArrayLike) -> np.ndarray:
    qq = np.asarray(q, dtype=float)
    if np.any(~((qq > 0.0) & (qq < 1.0))):
        raise DomainError(f"probabilities must lie strictly inside (0, 1), got {q!r}")
    return qq


def gp_quantile_raw(q: ArrayLike, sigma: float, xi: float) -> ArrayLike:
    _check_scale(sigma)
    qq = _check_probability(q)
    return _out(sigma * expm1_over_xi(-np.log1p(-qq), xi), q)


def gev_logpdf_raw(y: ArrayLike, mu: float, sigma: float, xi: float) -> ArrayLike:
    """GEV log density on raw floats; -inf outside {1 + xi (y - mu)/sigma > 0}."""
    _check_scale(sigma)
    yy = np.asarray(y, dtype=float)
    w = (yy - mu) / sigma
    t = 1.0 + xi * w
    ok = t > 0.0
    out = np.full(yy.shape, -np.inf)
    if np.any(ok):
        wo = w[ok]
        lt = log1p_over_xi(wo, xi)
        # exp(-lt) overflows far below the mode; the density is -inf there
        with np.errstate(over="ignore"):
            out[ok] = -math.log(sigma) - np.log1p(xi * wo) - lt - np.exp(-lt)
    return _out(out, y)


def gev_cdf_raw(y: ArrayLike, mu: float, sigma: float, xi: float) -> ArrayLike:
    _check_scale(sigma)
    yy = np.asarray(y, dtype=float)
    w = (yy - mu) / sigma
    t = 1.0 + xi * w
    inside = t > 0.0
    # below the lower endpoint for xi > 0, above the upper endpoint for xi < 0
    out = np.full(yy.shape, 0.0 if xi > 0.0 else 1.0)
    with np.errstate(over="ignore"):
        out[inside] = np.exp(-np.exp(-log1p_over_xi(w[inside], xi)))
    return _out(out, y)


def gev_quantile_raw(q: ArrayLike, mu: float, sigma: float, xi: float) -> ArrayLike:
    _check_scale(sigma)
    qq = _check_probability(q)
    return _out(mu + sigma * expm1_over_xi(-np.log(-np.log(qq)), xi), q)


def _uniforms(rng: RngLike, count: int) -> np.ndarray:
    if count < 1:
        raise DomainError(f"count must be a positive integer, got {count}")
    gen = np.random.default_rng(rng)
    return np.maximum(gen.random(count), np.finfo(float).tiny)


# Public API on validated parameter objects

def gp_logpdf(z: ArrayLike, params: GpParams) -> ArrayLike:
    return gp_logpdf_raw(z, params.sigma, params.xi)


def gp_cdf(z: ArrayLike, params: GpParams) -> ArrayLike:
    return gp_cdf_raw(z, params.sigma, params.xi)


def gp_quantile(q: ArrayLike, params: GpParams) -> ArrayLike:
    return gp_quantile_raw(q, params.sigma, params.xi)


def gp_sample(params: GpParams, count: int, rng: RngLike = None) -> np.ndarray:
    """Draws by inversion; rng is a caller-owned Generator or a seed."""
    return gp_quantile_raw(_uniforms(rng, count), params.sigma, params.xi)


def gev_logpdf(y: ArrayLike, params: GevParams) -> ArrayLike:
    return gev_logpdf_raw(y, params.mu, params.sigma, params.xi)


def gev_cdf(y: ArrayLike, params: GevParams) -> ArrayLike:
    return gev_cdf_raw(y, params.mu, params.sigma, params.xi)


def gev_quantile(q: ArrayLike, params: GevParams) -> ArrayLike:
    return gev_quantile_raw(q, params.mu, params.sigma, params.xi)


def gev_sample(params: GevParams, count: int, rng: RngLike = None) -> np.ndarray:
    return gev_quantile_raw(_uniforms(rng, count), params.mu, params.sigma, params.xi)


def gp_moment(r: int, params: GpParams) -> float:
    """E(Z^r) = r! sigma^r / prod_{i=1..r} (1 - i xi), finite only for xi < 1/r."""
    if int(r) != r or r < 1:
        raise DomainError(f"moment order must be a positive integer, got {r}")
    r = int(r)
    if params.xi * r >= 1.0:
        raise MomentNotFiniteError(f"E(Z^{r}) does not exist for xi={params.xi} (needs xi < 1/{r})")
    value = math.factorial(r) * params.sigma ** r
    for i in range(1, r + 1):
        value /= 1.0 - i * params.xi
    return value


def gp_negpower_moment(a: float, params: GpParams) -> float:
    """E(Z^(-a/xi)) for xi < 0 and a > xi."""
    xi, sigma = params.xi, params.sigma
    if xi >= 0.0:
        raise DomainError(f"gp_negpower_moment needs xi < 0, got {xi}")
    if a <= xi:
        raise DomainError(f"gp_negpower_moment needs a > xi, got a={a}, xi={xi}")
    log_value = (
        (a / xi - 1.0) * math.log(-xi)
        - (a / xi) * math.log(sigma)
        + log_gamma(1.0 - a / xi)
        + log_gamma(-1.0 / xi)
        - log_gamma(1.0 - (a + 1.0) / xi)
    )
    return math.exp(log_value)

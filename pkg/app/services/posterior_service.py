"""
Unnormalised log posteriors for the GP, GEV and NHPP models, and the
reduced (phi, xi) integrand of the GEV posterior with sigma integrated out.

Support constraints are checked before any logarithm is taken, so points
off the support return -inf instead of raising.
"""
import logging
import math
from typing import Optional, Tuple, Union

import numpy as np
from scipy.special import logsumexp

from app.core.exceptions import DomainError, UsageError
from app.core.specfun import log_gamma
from app.schemas.params import BlockMaximaSample, ExcessSample, NhppData
from app.schemas.prior import PriorSpec
from app.services.evd_service import XI_SWITCH, log1p_over_xi
from app.services.prior_service import log_xi_component

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]


def _require_model(prior: PriorSpec, model: str) -> None:
    if prior.model != model:
        raise UsageError(f"prior {prior.family.value} cannot be used with the {model.upper()} likelihood")


def _check_sigma(sigma: float) -> None:
    if not (math.isfinite(sigma) and sigma > 0.0):
        raise DomainError(f"sigma must be positive and finite, got {sigma}")


def _gev_pieces(x: np.ndarray, mu: float, sigma: float, xi: float) -> Optional[Tuple[float, np.ndarray]]:
    """
    For t_i = 1 + xi (x_i - mu)/sigma returns (sum of (1 + 1/xi) ln t_i,
    array of t_i^(-1/xi)), or None when some t_i <= 0.
    """
    w = (x - mu) / sigma
    t = 1.0 + xi * w
    if np.any(t <= 0.0):
        return None
    lt = log1p_over_xi(w, xi)
    return float(np.sum(np.log1p(xi * w) + lt)), np.exp(-lt)


def gp_log_posterior(data: ExcessSample, prior: PriorSpec, sigma: float, xi: float) -> float:
    _require_model(prior, "gp")
    _check_sigma(sigma)
    log_pi = log_xi_component(prior, xi)
    if log_pi == -np.inf:
        return -np.inf
    w = data.z / sigma
    if 1.0 + xi * w[-1] <= 0.0:
        return -np.inf
    log_lik = -data.m * math.log(sigma) - float(np.sum(np.log1p(xi * w) + log1p_over_xi(w, xi)))
    return log_pi - math.log(sigma) + log_lik


def _gev_log_posterior_raw(y: np.ndarray, log_pi: float, mu: float, sigma: float, xi: float) -> float:
    pieces = _gev_pieces(y, mu, sigma, xi)
    if pieces is None:
        return -np.inf
    log_terms, exceed = pieces
    base = log_pi - (len(y) + 1) * math.log(sigma) - log_terms
    return base - float(np.sum(exceed))


def gev_log_posterior(data: BlockMaximaSample, prior: PriorSpec, mu: float, sigma: float, xi: float) -> float:
    _require_model(prior, "gev")
    _check_sigma(sigma)
    log_pi = log_xi_component(prior, xi)
    if log_pi == -np.inf:
        return -np.inf
    return _gev_log_posterior_raw(data.y, log_pi, mu, sigma, xi)


def nhpp_log_posterior(data: NhppData, prior: PriorSpec, mu: float, sigma: float, xi: float) -> float:
    """Point-process posterior; the threshold term uses the notional block count n_blocks."""
    _require_model(prior, "gev")
    _check_sigma(sigma)
    log_pi = log_xi_component(prior, xi)
    if log_pi == -np.inf:
        return -np.inf
    pieces = _gev_pieces(data.x, mu, sigma, xi)
    threshold = _gev_pieces(np.array([data.threshold]), mu, sigma, xi)
    if pieces is None or threshold is None:
        return -np.inf
    log_terms, _ = pieces
    base = log_pi - (data.m + 1) * math.log(sigma) - log_terms
    return base - data.n_blocks * float(threshold[1][0])


def reduced_gev_log_integrand_raw(y: np.ndarray, log_pi: float, phi: ArrayLike, xi: float) -> ArrayLike:
    """
    log of the phi-integrand left after integrating sigma out of the GEV
    posterior at fixed (phi, xi), phi = mu - sigma/xi. Vectorised over phi.
    """
    ph = np.atleast_1d(np.asarray(phi, dtype=float))
    out = np.full(ph.shape, -np.inf)
    if xi == 0.0 or abs(xi) < XI_SWITCH or log_pi == -np.inf:
        return float(out[0]) if np.ndim(phi) == 0 else out

    ok = ph < y[0] if xi > 0.0 else ph > y[-1]
    if np.any(ok):
        out[ok] = reduced_log_integrand_from_log_distance(
            np.log(np.abs(y[None, :] - ph[ok, None])), log_pi, xi
        )
    return float(out[0]) if np.ndim(phi) == 0 else out


def reduced_gev_log_integrand(data: BlockMaximaSample, prior: PriorSpec, phi: ArrayLike, xi: float) -> ArrayLike:
    _require_model(prior, "gev")
    return reduced_gev_log_integrand_raw(data.y, log_xi_component(prior, xi), phi, xi)


def reduced_log_integrand_from_log_distance(log_d: np.ndarray, log_pi: float, xi: float) -> np.ndarray:
    """Same integrand written in ln|y_i - phi| (one row per phi, one column per y_i)."""
    n = log_d.shape[1]
    if abs(xi) < XI_SWITCH or log_pi == -np.inf:
        return np.full(log_d.shape[0], -np.inf)
    return (
        log_pi
        + (1 - n) * math.log(abs(xi))
        - (1.0 + 1.0 / xi) * np.sum(log_d, axis=1)
        - n * logsumexp(-log_d / xi, axis=1)
        + log_gamma(float(n))
    )

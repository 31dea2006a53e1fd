"""
Reference priors for the GP and GEV models.

Every prior factorises as (1/sigma) * pi(xi). `log_xi_component` evaluates
log pi(xi) on numpy arrays (it is what the propriety lab integrates) and
`log_prior` adds the -ln(sigma) factor for a validated parameter object.
Densities are unnormalised; -inf marks points outside the support.
"""
import logging
import math
from typing import List, Union

import numpy as np
from numpy.polynomial import polynomial as P

from app.core.exceptions import DomainError, UsageError
from app.core.specfun import (
    ALZER_LAMBDA,
    EULER_GAMMA,
    PI_SQ_6,
    digamma,
    digamma1p_series,
    exp_series,
    log_gamma,
    log_gamma1p_series,
)
from app.schemas.params import GevParams, GpParams
from app.schemas.prior import JeffreysGevComponents, PriorCatalogEntry, PriorFamily, PriorSpec

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]

# pi^2/6 + (1 - gamma)^2
JEFFREYS_GEV_C = PI_SQ_6 + (1.0 - EULER_GAMMA) ** 2
# c = (4/3)^4 {C pi^(-1/2) - 1}
JEFFREYS_GEV_LOWER_C = (4.0 / 3.0) ** 4 * (JEFFREYS_GEV_C / math.sqrt(math.pi) - 1.0)
NEAR_HALF_EPSILON = 1.29

XI_ZERO_OFFSET = 1e-6
SERIES_RADIUS = 0.05
LOG_PATH_START = 60.0
_SERIES_ORDER = 14


def _poly_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.convolve(a, b)[: _SERIES_ORDER + 1]


def _numerator_series() -> np.ndarray:
    """Taylor coefficients of T1 + T2 about xi = 0, after dropping the vanishing xi^0..xi^3 terms."""
    n = _SERIES_ORDER
    lg = log_gamma1p_series(n)
    gamma_1p = exp_series(lg)
    gamma_1p_2x = exp_series(lg * 2.0 ** np.arange(n + 1))
    gamma_2p = _poly_mul(np.array([1.0, 1.0]), gamma_1p)
    psi = digamma1p_series(n)

    one = np.zeros(n + 1)
    one[0] = 1.0
    t1 = JEFFREYS_GEV_C * _poly_mul(np.array([1.0, 2.0, 1.0]), gamma_1p_2x)
    middle = 2.0 * (1.0 - EULER_GAMMA) * (EULER_GAMMA * one + psi) - 2.0 * PI_SQ_6 * one
    t2 = PI_SQ_6 * one + _poly_mul(middle, gamma_2p) - _poly_mul(
        _poly_mul(one + psi, one + psi), _poly_mul(gamma_2p, gamma_2p)
    )
    return (t1 + t2)[4:]


_NUMERATOR_SERIES = _numerator_series()


def _t1_t2(xi: np.ndarray):
    gamma_2p = np.exp(log_gamma(2.0 + xi))
    psi = digamma(1.0 + xi)
    t1 = JEFFREYS_GEV_C * (1.0 + xi) ** 2 * np.exp(log_gamma(1.0 + 2.0 * xi))
    t2 = (
        PI_SQ_6
        + (2.0 * (1.0 - EULER_GAMMA) * (EULER_GAMMA + psi) - 2.0 * PI_SQ_6) * gamma_2p
        - (1.0 + psi) ** 2 * gamma_2p ** 2
    )
    return t1, t2


def _log_t2_over_t1(xi: np.ndarray, log_t1: np.ndarray) -> np.ndarray:
    log_g = log_gamma(2.0 + xi)
    psi = digamma(1.0 + xi)
    middle = 2.0 * (1.0 - EULER_GAMMA) * (EULER_GAMMA + psi) - 2.0 * PI_SQ_6
    ratio = (
        np.exp(math.log(PI_SQ_6) - log_t1)
        + middle * np.exp(log_g - log_t1)
        - (1.0 + psi) ** 2 * np.exp(2.0 * log_g - log_t1)
    )
    return np.log1p(ratio)


def jeffreys_gev_log_xi(xi: ArrayLike) -> ArrayLike:
    """log pi_xi for the Jeffreys GEV prior; -inf for xi <= -1/2."""
    x = np.asarray(xi, dtype=float)
    flat = np.atleast_1d(x).astype(float)
    out = np.full(flat.shape, -np.inf)

    series = (flat > -0.5) & (np.abs(flat) < SERIES_RADIUS)
    direct = (flat > -0.5) & ~series & (flat <= LOG_PATH_START)
    large = flat > LOG_PATH_START

    if np.any(series):
        out[series] = 0.5 * np.log(P.polyval(flat[series], _NUMERATOR_SERIES))
    if np.any(direct):
        xd = flat[direct]
        t1, t2 = _t1_t2(xd)
        num = t1 + t2
        with np.errstate(divide="ignore", invalid="ignore"):
            out[direct] = np.where(num > 0.0, 0.5 * (np.log(num) - 4.0 * np.log(np.abs(xd))), -np.inf)
    if np.any(large):
        xl = flat[large]
        log_t1 = math.log(JEFFREYS_GEV_C) + 2.0 * np.log1p(xl) + log_gamma(1.0 + 2.0 * xl)
        out[large] = 0.5 * (log_t1 + _log_t2_over_t1(xl, log_t1) - 4.0 * np.log(xl))

    if np.ndim(xi) == 0:
        return float(out[0])
    return out.reshape(x.shape)


def jeffreys_gev_xi(xi: float) -> float:
    """
    xi-component of the Jeffreys GEV prior, sqrt((T1 + T2) / xi^4).

    At xi = 0 the expression is a removable singularity; the value returned
    there is the average of the values at +-XI_ZERO_OFFSET.
    """
    if not math.isfinite(xi) or xi <= -0.5:
        raise DomainError(f"the Jeffreys GEV prior needs xi > -1/2, got {xi}")
    if xi == 0.0:
        return 0.5 * (jeffreys_gev_xi(XI_ZERO_OFFSET) + jeffreys_gev_xi(-XI_ZERO_OFFSET))
    return float(np.exp(jeffreys_gev_log_xi(xi)))


def jeffreys_gev_components(xi: float) -> JeffreysGevComponents:
    if not math.isfinite(xi) or xi <= -0.5 or xi == 0.0:
        raise DomainError(f"components need xi > -1/2 and xi != 0, got {xi}")
    x = np.array([xi])
    with np.errstate(over="ignore", invalid="ignore"):
        t1, t2 = _t1_t2(x)
        p = (1.0 + xi) ** 2 * float(np.exp(log_gamma(1.0 + 2.0 * xi)))
        q = float(np.exp(log_gamma(2.0 + xi))) * (digamma(1.0 + xi) + (1.0 + xi) / xi)
    pi_xi = jeffreys_gev_xi(xi)
    return JeffreysGevComponents(
        xi=xi, p=p, q=q, T1=float(t1[0]), T2=float(t2[0]), pi_xi_sq=pi_xi * pi_xi
    )


def jeffreys_gev_xi_determinant(xi: float) -> float:
    """The same component from the raw Fisher-information braces, for cross-checks."""
    if not math.isfinite(xi) or xi <= -0.5 or xi == 0.0:
        raise DomainError(f"determinant form needs xi > -1/2 and xi != 0, got {xi}")
    g = math.exp(log_gamma(2.0 + xi))
    p = (1.0 + xi) ** 2 * math.exp(log_gamma(1.0 + 2.0 * xi))
    q = g * (digamma(1.0 + xi) + (1.0 + xi) / xi)
    a = 1.0 - EULER_GAMMA + 1.0 / xi
    first = 1.0 - 2.0 * g + p
    second = PI_SQ_6 + a * a - 2.0 * q / xi + p / (xi * xi)
    cross = a - g / xi - q + p / xi
    det = first * second - cross * cross
    if det <= 0.0:
        raise DomainError(f"determinant lost all precision at xi={xi}")
    return math.sqrt(det) / (xi * xi)


def jeffreys_gev_lower_bound(xi: ArrayLike) -> ArrayLike:
    """c^(1/2) (1 + xi)^(lambda xi - gamma)."""
    x = np.asarray(xi, dtype=float)
    value = math.sqrt(JEFFREYS_GEV_LOWER_C) * np.exp((ALZER_LAMBDA * x - EULER_GAMMA) * np.log1p(x))
    return float(value) if np.ndim(xi) == 0 else value


def jeffreys_gev_f(xi: float) -> float:
    """Helper of the lower-bound argument, f(xi) = C / (1 + psi(1 + xi)) - (1 - gamma)."""
    return JEFFREYS_GEV_C / (1.0 + digamma(1.0 + xi)) - (1.0 - EULER_GAMMA)


def jeffreys_gev_upper_bound_near_half(xi: float) -> float:
    """2 C^(1/2) (1 + 2 xi)^(-1/2) on -1/2 < xi < -1/2 + 1.29."""
    if not -0.5 < xi < -0.5 + NEAR_HALF_EPSILON:
        raise DomainError(f"near-half upper bound is only valid on (-0.5, {-0.5 + NEAR_HALF_EPSILON}), got {xi}")
    return 2.0 * math.sqrt(JEFFREYS_GEV_C) / math.sqrt(1.0 + 2.0 * xi)


def jeffreys_gev_trunc_head_bound(epsilon: float) -> float:
    """2^(3/2) C^(1/2) eps^(1/2): the near-half bound integrated over (-1/2, -1/2 + eps)."""
    if not 0.0 < epsilon < NEAR_HALF_EPSILON:
        raise DomainError(f"epsilon must lie in (0, {NEAR_HALF_EPSILON}), got {epsilon}")
    return 2.0 ** 1.5 * math.sqrt(JEFFREYS_GEV_C * epsilon)


def xi_support(spec: PriorSpec):
    """(lower, upper) of the xi-support; lower is open for the Jeffreys families."""
    lower = -math.inf
    if spec.family in (PriorFamily.JEFFREYS_GP, PriorFamily.JEFFREYS_GEV, PriorFamily.JEFFREYS_GEV_TRUNC):
        lower = -0.5
    if spec.xi_lower is not None:
        lower = max(lower, spec.xi_lower)
    upper = spec.xi_upper if spec.xi_upper is not None else math.inf
    return lower, upper


def log_xi_component(spec: PriorSpec, xi: ArrayLike) -> ArrayLike:
    """log pi(xi) for any catalog family, vectorised."""
    x = np.asarray(xi, dtype=float)
    family = spec.family

    if family in (PriorFamily.UNIFORM_GP, PriorFamily.UNIFORM_GEV):
        out = np.zeros_like(x)
    elif family in (PriorFamily.MDI_GP,):
        out = -x
    elif family == PriorFamily.MDI_GP_TRUNC:
        out = -(x + 1.0)
    elif family in (PriorFamily.MDI_GEV, PriorFamily.MDI_GEV_TRUNC):
        out = -EULER_GAMMA * (1.0 + x)
    elif family == PriorFamily.JEFFREYS_GP:
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(x > -0.5, -np.log1p(x) - 0.5 * np.log1p(2.0 * x), -np.inf)
    else:
        out = np.asarray(jeffreys_gev_log_xi(x), dtype=float)

    lower, upper = xi_support(spec)
    out = np.where((x >= lower) & (x <= upper), out, -np.inf)
    if lower == -0.5:
        out = np.where(x > lower, out, -np.inf)
    return float(out) if np.ndim(xi) == 0 else out


def log_prior(spec: PriorSpec, params: Union[GpParams, GevParams]) -> float:
    """Unnormalised log prior density, log pi(xi) - ln(sigma)."""
    is_gev = isinstance(params, GevParams)
    if spec.model == "gp" and is_gev:
        raise UsageError(f"prior {spec.family.value} is a GP prior but GEV parameters were given")
    if spec.model == "gev" and not is_gev:
        raise UsageError(f"prior {spec.family.value} is a GEV prior but GP parameters were given")
    return log_xi_component(spec, params.xi) - math.log(params.sigma)


_CATALOG = (
    (PriorFamily.JEFFREYS_GP, "1 / (sigma (1+xi) sqrt(1+2xi))", "sigma > 0, xi > -1/2", "none"),
    (PriorFamily.MDI_GP, "exp(-xi) / sigma", "sigma > 0, xi real", "none"),
    (PriorFamily.MDI_GP_TRUNC, "exp(-(xi+1)) / sigma", "sigma > 0, xi >= xi_lower", "xi_lower (default -1)"),
    (PriorFamily.UNIFORM_GP, "1 / sigma", "sigma > 0, xi real", "optional xi_lower, xi_upper"),
    (PriorFamily.JEFFREYS_GEV, "sqrt((T1+T2)/xi^4) / sigma", "mu real, sigma > 0, xi > -1/2", "none"),
    (PriorFamily.JEFFREYS_GEV_TRUNC, "sqrt((T1+T2)/xi^4) / sigma", "mu real, sigma > 0, -1/2 < xi <= xi_upper", "xi_upper (required)"),
    (PriorFamily.MDI_GEV, "exp(-gamma(1+xi)) / sigma", "mu real, sigma > 0, xi real", "none"),
    (PriorFamily.MDI_GEV_TRUNC, "exp(-gamma(1+xi)) / sigma", "mu real, sigma > 0, xi >= xi_lower", "xi_lower (default -1)"),
    (PriorFamily.UNIFORM_GEV, "1 / sigma", "mu real, sigma > 0, xi real", "optional xi_lower, xi_upper"),
)


def prior_catalog() -> List[PriorCatalogEntry]:
    return [
        PriorCatalogEntry(family=f, model=f.model, density=d, support=s, hyperparameters=h)
        for f, d, s, h in _CATALOG
    ]


def scaled_prior_curve(spec: PriorSpec, grid: np.ndarray) -> np.ndarray:
    """pi(xi) on a grid, scaled to a maximum of 1; zero off the support."""
    log_values = np.asarray(log_xi_component(spec, np.asarray(grid, dtype=float)), dtype=float)
    finite = np.isfinite(log_values)
    if not np.any(finite):
        raise DomainError(f"prior {spec.family.value} vanishes on the whole grid")
    return np.where(finite, np.exp(log_values - np.max(log_values[finite])), 0.0)

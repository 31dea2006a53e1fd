"""
Special functions used by the priors and the propriety proofs.

log_gamma is the 14-term rational (Lanczos type) approximation with
g = 671/128; the coefficients are pinned here and can be regenerated with
scripts/regenerate_lanczos.py. digamma shifts the argument with the
recurrence until it is >= 10 and then uses the asymptotic series.
All functions accept scalars or numpy arrays.
"""
import math
from typing import Union

import numpy as np

from app.core.exceptions import DomainError

ArrayLike = Union[float, np.ndarray]

EULER_GAMMA = 0.57721566490153286
PI_SQ_6 = 1.6449340668482264
# (pi^2/6 - gamma) / 2
ALZER_LAMBDA = 0.53385920097334675

LANCZOS_G = 5.2421875
LANCZOS_SERIES_0 = 0.999999999999997092
LANCZOS_COEFFICIENTS = (
    57.1562356658629235,
    -59.5979603554754912,
    14.1360979747417471,
    -0.491913816097620199,
    0.339946499848118887e-4,
    0.465236289270485756e-4,
    -0.983744753048795646e-4,
    0.158088703224912494e-3,
    -0.210264441724104883e-3,
    0.217439618115212643e-3,
    -0.164318106536763890e-3,
    0.844182239838527433e-4,
    -0.261908384015814087e-4,
    0.368991826595316234e-5,
)
SQRT_2PI = 2.5066282746310005

DIGAMMA_SHIFT = 10.0
# B_2k / (2k) for k = 1..7
_DIGAMMA_ASYMPTOTIC = (
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
)

# zeta(2) .. zeta(15)
ZETA_VALUES = (
    1.6449340668482264,
    1.2020569031595943,
    1.0823232337111382,
    1.0369277551433699,
    1.0173430619844491,
    1.0083492773819228,
    1.0040773561979443,
    1.0020083928260822,
    1.0009945751278181,
    1.0004941886041195,
    1.0002460865533080,
    1.0001227133475785,
    1.0000612481350587,
    1.0000305882363070,
)


def _positive_array(x: ArrayLike, name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0.0):
        raise DomainError(f"{name} requires finite positive arguments, got {x!r}")
    return arr


def _out(arr: np.ndarray, x: ArrayLike) -> ArrayLike:
    return float(arr) if np.ndim(x) == 0 else arr


def log_gamma(x: ArrayLike) -> ArrayLike:
    """ln Gamma(x) for x > 0."""
    xx = _positive_array(x, "log_gamma")
    y = xx.copy()
    tmp = xx + LANCZOS_G
    tmp = (xx + 0.5) * np.log(tmp) - tmp
    ser = np.full_like(xx, LANCZOS_SERIES_0)
    for cof in LANCZOS_COEFFICIENTS:
        y = y + 1.0
        ser = ser + cof / y
    return _out(tmp + np.log(SQRT_2PI * ser / xx), x)


def digamma(x: ArrayLike) -> ArrayLike:
    """psi(x) = d/dx ln Gamma(x) for x > 0."""
    xx = _positive_array(x, "digamma").copy()
    value = np.zeros_like(xx)
    small = xx < DIGAMMA_SHIFT
    while np.any(small):
        value[small] -= 1.0 / xx[small]
        xx[small] += 1.0
        small = xx < DIGAMMA_SHIFT
    r = 1.0 / (xx * xx)
    series = np.zeros_like(xx)
    for coef in reversed(_DIGAMMA_ASYMPTOTIC):
        series = (series + coef) * r
    value += np.log(xx) - 0.5 / xx - series
    return _out(value, x)


def alzer_lower_bound(x: ArrayLike) -> ArrayLike:
    """x^(lambda (x-1) - gamma). A lower bound for Gamma(x) on x >= 1 only; on (0, 1) it can exceed Gamma."""
    xx = _positive_array(x, "alzer_lower_bound")
    return _out(np.exp((ALZER_LAMBDA * (xx - 1.0) - EULER_GAMMA) * np.log(xx)), x)


def duplication_residual(z: ArrayLike) -> ArrayLike:
    zz = _positive_array(z, "duplication_residual")
    rhs = (
        -0.5 * math.log(2.0 * math.pi)
        + (2.0 * zz - 0.5) * math.log(2.0)
        + log_gamma(zz)
        + log_gamma(zz + 0.5)
    )
    return _out(log_gamma(2.0 * zz) - rhs, z)


def digamma_upper_bound(x: ArrayLike) -> ArrayLike:
    """ln(x) - 1/(2x); exceeds psi(x) for x > 1."""
    xx = _positive_array(x, "digamma_upper_bound")
    return _out(np.log(xx) - 0.5 / xx, x)


# Power series about 1, used where closed forms cancel catastrophically.

def log_gamma1p_series(order: int) -> np.ndarray:
    """Coefficients c_k of ln Gamma(1+x) = sum_k c_k x^k, k = 0..order."""
    if order > len(ZETA_VALUES) + 1:
        raise DomainError(f"series order {order} exceeds the tabulated zeta values")
    coef = np.zeros(order + 1)
    if order >= 1:
        coef[1] = -EULER_GAMMA
    for k in range(2, order + 1):
        coef[k] = (-1) ** k * ZETA_VALUES[k - 2] / k
    return coef


def digamma1p_series(order: int) -> np.ndarray:
    """Coefficients of psi(1+x), k = 0..order."""
    if order > len(ZETA_VALUES):
        raise DomainError(f"series order {order} exceeds the tabulated zeta values")
    coef = np.zeros(order + 1)
    coef[0] = -EULER_GAMMA
    for k in range(1, order + 1):
        coef[k] = (-1) ** (k + 1) * ZETA_VALUES[k - 1]
    return coef


def exp_series(coef: np.ndarray) -> np.ndarray:
    """exp of a truncated power series with zero constant term."""
    n = len(coef)
    out = np.zeros(n)
    out[0] = 1.0
    for j in range(1, n):
        out[j] = sum(k * coef[k] * out[j - k] for k in range(1, j + 1)) / j
    return out

"""
Propriety lab: normalising constants of the GP and GEV posteriors.

Both constants are computed as an outer integral over xi of
pi(xi) * inner(xi), where the inner integral over the remaining
coordinate is mapped onto (0, 1):

    GP   inner = G_m(xi), sigma-leg, substitution p = F_GP(z_m | sigma, xi)
    GEV  inner = (n-1)! H_n(xi), phi-leg after sigma has been integrated
         out analytically, substitution u = |y_1 - phi|^-1 followed by
         1 + xi r delta_n = (1 - p)^-xi

The outer integral is truncated to the box [-X_k, X_k] intersected with the
prior support, X_k = X_0 2^k, and the box is doubled up to the configured
limit. The verdict protocol looks at the growth of the partial integrals
over the last GROWTH_WINDOW doublings and, for the divergent priors that
have a proved lower bound, compares the tail partials with that bound.
"""
import logging
import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import logsumexp

from app.core.exceptions import DomainError, UsageError
from app.core.quadrature import LogQuadResult, log_integrate, log_integrate_sqrt_left, log_integrate_tail
from app.core.specfun import ALZER_LAMBDA, EULER_GAMMA, log_gamma
from app.schemas.params import BlockMaximaSample, ExcessSample
from app.schemas.prior import PriorFamily, PriorSpec
from app.schemas.propriety import PartialIntegral, ProprietyVerdict, QuadConfig, VerdictStatus
from app.services.evd_service import XI_SWITCH, log1p_over_xi
from app.services.posterior_service import reduced_log_integrand_from_log_distance
from app.services.prior_service import JEFFREYS_GEV_LOWER_C, log_xi_component, xi_support

logger = logging.getLogger(__name__)

XI_BREAKPOINTS = (-1.0, -0.5, 0.0, 1.0, 3.0)
GROWTH_WINDOW = 4
# inner integrals are run this much tighter than the outer cells
INNER_TOL_RATIO = 1e-2
_LOG_EXPM1_SWITCH = 30.0
_MAX_LOG_FLOAT = 709.0

SQRT_FAMILIES = (PriorFamily.JEFFREYS_GP, PriorFamily.JEFFREYS_GEV, PriorFamily.JEFFREYS_GEV_TRUNC)

InnerFn = Callable[[float], float]
LogFn = Callable[[np.ndarray], np.ndarray]


def _exp_or_none(log_value: float) -> Optional[float]:
    if log_value == -np.inf:
        return 0.0
    if not math.isfinite(log_value) or log_value >= _MAX_LOG_FLOAT:
        return None
    return math.exp(log_value)


def _exp_or_inf(log_value: float) -> float:
    value = _exp_or_none(log_value)
    return math.inf if value is None else value


# Inner legs

def _log_expm1(e: np.ndarray) -> np.ndarray:
    """log(exp(e) - 1) for e > 0."""
    out = np.empty_like(e)
    small = e < _LOG_EXPM1_SWITCH
    out[small] = np.log(np.expm1(e[small]))
    big = ~small
    out[big] = e[big] + np.log1p(-np.exp(-e[big]))
    return out


def _scaled_terms(p: np.ndarray, xi: float, ratios: np.ndarray, log_last: float):
    """
    On nodes p in (0, 1), with r defined by 1 + xi r d_last = (1 - p)^-xi,
    returns ln r, A_i = ln(1 + xi r d_i), B_i = A_i / xi and ln(1 - p).
    ratios holds d_i / d_last for the interior points.
    """
    log_q = np.log1p(-p)
    if abs(xi) < XI_SWITCH:
        base = -log_q + 0.5 * xi * log_q * log_q
        rd = base[:, None] * ratios[None, :]
        return np.log(base) - log_last, np.log1p(xi * rd), log1p_over_xi(rd, xi), log_q

    e = -xi * log_q
    if xi > 0.0:
        log_em1 = _log_expm1(e)
        log_r = log_em1 - math.log(xi) - log_last
        a = np.logaddexp(0.0, log_em1[:, None] + np.log(ratios)[None, :])
    else:
        em1 = np.expm1(e)
        log_r = np.log(-em1) - math.log(-xi) - log_last
        a = np.log1p(em1[:, None] * ratios[None, :])
    return log_r, a, a / xi, log_q


def _gp_inner_integrand(xi: float, ratios: np.ndarray, log_last: float, m: int) -> LogFn:
    def integrand(p: np.ndarray) -> np.ndarray:
        log_r, a, b, _ = _scaled_terms(p, xi, ratios, log_last)
        return (m - 1) * log_r - np.sum(a + b, axis=1) - log_last

    return integrand


def _gev_inner_integrand(xi: float, ratios: np.ndarray, log_last: float, n: int) -> LogFn:
    def integrand(p: np.ndarray) -> np.ndarray:
        log_r, a, b, log_q = _scaled_terms(p, xi, ratios, log_last)
        bracket = 1.0 + np.sum(np.exp(-b), axis=1) + np.exp(log_q)
        return (n - 2) * log_r - np.sum(a + b, axis=1) - n * np.log(bracket) - log_last

    return integrand


def _inner_split(xi: float) -> float:
    return 0.5 if abs(xi) <= 2.0 else 1.0 / abs(xi)


def _make_inner(build: Callable[[float], LogFn], has_interior: bool, cfg: QuadConfig) -> InnerFn:
    tol = cfg.cell_tol * INNER_TOL_RATIO
    if not has_interior:
        # integrand does not depend on xi
        constant = log_integrate(build(1.0), 0.0, 1.0, tol=tol, limit=cfg.cell_limit).log_value
        return lambda xi: constant

    def inner(xi: float) -> float:
        return log_integrate(
            build(xi), 0.0, 1.0, tol=tol, limit=cfg.cell_limit, points=[_inner_split(xi)]
        ).log_value

    return inner


def gp_inner_log_integral(data: ExcessSample, cfg: QuadConfig) -> InnerFn:
    """xi -> log G_m(xi), the sigma-integral of the GP likelihood times sigma^-1."""
    z = data.z
    ratios = z[:-1] / z[-1]
    log_last = math.log(z[-1])
    return _make_inner(lambda xi: _gp_inner_integrand(xi, ratios, log_last, data.m), data.m > 1, cfg)


def gev_inner_log_integral(data: BlockMaximaSample, cfg: QuadConfig) -> InnerFn:
    """xi -> log H_n(xi) for n >= 2 (the (n-1)! factor is not included)."""
    if data.n < 2:
        raise DomainError("the mapped phi-leg needs n >= 2; n = 1 diverges for every xi")
    spacings = data.spacings
    ratios = spacings[:-1] / spacings[-1]
    log_last = math.log(spacings[-1])
    return _make_inner(lambda xi: _gev_inner_integrand(xi, ratios, log_last, data.n), data.n > 2, cfg)


def _single_maximum_inner(y1: float, half_width: float, cfg: QuadConfig) -> InnerFn:
    """phi-leg for n = 1 in s = ln|y_1 - phi|^-1, truncated to [-S, S]."""
    tol = cfg.cell_tol * INNER_TOL_RATIO

    def inner(xi: float) -> float:
        def integrand(s: np.ndarray) -> np.ndarray:
            # ln|y_1 - phi| = -s and |dphi/ds| = e^-s
            return reduced_log_integrand_from_log_distance(-s[:, None], 0.0, xi) - s

        return log_integrate(integrand, -half_width, half_width, tol=tol, limit=cfg.cell_limit).log_value

    return inner


class _OuterIntegrand:
    """log pi(xi) + constant + inner(xi), evaluated node by node."""

    def __init__(self, prior: PriorSpec, inner: InnerFn, constant: float = 0.0):
        self.prior = prior
        self.inner = inner
        self.constant = constant

    def __call__(self, xi: np.ndarray) -> np.ndarray:
        log_pi = np.atleast_1d(np.asarray(log_xi_component(self.prior, xi), dtype=float))
        out = np.full(log_pi.shape, -np.inf)
        for j in np.flatnonzero(np.isfinite(log_pi)):
            out[j] = log_pi[j] + self.constant + self.inner(float(xi[j]))
        return out


# Outer leg and verdicts

@dataclass
class _Segment:
    a: float
    b: float
    log_value: float
    converged: bool


@dataclass
class _TailBound:
    """Lower bound for the partial integral over (-T, anchor) or (anchor, T)."""
    side: str
    anchor: float
    log_bound: Callable[[float], float]
    name: str


def _integrate_range(f: LogFn, a: float, b: float, sqrt_at: Optional[float], cfg: QuadConfig) -> List[_Segment]:
    if not b > a:
        return []
    edges = [a] + [p for p in XI_BREAKPOINTS if a < p < b] + [b]
    segments = []
    for left, right in zip(edges[:-1], edges[1:]):
        if sqrt_at is not None and left == sqrt_at:
            res = log_integrate_sqrt_left(f, left, right, tol=cfg.cell_tol, limit=cfg.cell_limit)
        else:
            res = log_integrate(f, left, right, tol=cfg.cell_tol, limit=cfg.cell_limit)
        segments.append(_Segment(left, right, res.log_value, res.converged))
    return segments


def _log_sum(values: Sequence[float]) -> float:
    return float(logsumexp(values)) if len(values) else -np.inf


def _tail_log(segments: List[_Segment], bound: _TailBound) -> float:
    if bound.side == "left":
        return _log_sum([s.log_value for s in segments if s.b <= bound.anchor])
    return _log_sum([s.log_value for s in segments if s.a >= bound.anchor])


def _run_levels(
    level_integrand: Callable[[int], LogFn],
    support: Tuple[float, float],
    cfg: QuadConfig,
    sqrt_at: Optional[float],
    bound: Optional[_TailBound],
    recompute: bool,
    label: str,
    growth_source: str,
) -> ProprietyVerdict:
    lower, upper = support
    limit_growth = math.log(cfg.growth_factor)
    segments: List[_Segment] = []
    partials: List[PartialIntegral] = []
    growths: List[float] = []
    diagnostics: List[str] = []
    left_new, right_new = -np.inf, -np.inf
    previous: Optional[Tuple[float, float]] = None
    prev_log = -np.inf
    f = level_integrand(0)

    for k in range(cfg.doubling_limit + 1):
        half_width = cfg.xi_half_width * 2.0 ** k
        lo, hi = max(-half_width, lower), min(half_width, upper)
        if recompute:
            f = level_integrand(k)
        if recompute or previous is None or not previous[1] > previous[0]:
            segments = _integrate_range(f, lo, hi, sqrt_at, cfg)
            left_new = right_new = _log_sum([s.log_value for s in segments])
        else:
            left = _integrate_range(f, lo, previous[0], sqrt_at, cfg)
            right = _integrate_range(f, previous[1], hi, sqrt_at, cfg)
            left_new = _log_sum([s.log_value for s in left])
            right_new = _log_sum([s.log_value for s in right])
            segments = left + segments + right
        previous = (lo, hi)

        log_total = _log_sum([s.log_value for s in segments])
        partial = PartialIntegral(truncation=half_width, log_value=log_total, value=_exp_or_none(log_total))
        if bound is not None:
            partial.tail_log_value = _tail_log(segments, bound)
            partial.tail_bound_log = bound.log_bound(half_width) if half_width > abs(bound.anchor) else -np.inf
        partials.append(partial)

        if k > 0:
            if log_total == prev_log:
                growths.append(0.0)
            elif prev_log == -np.inf:
                growths.append(np.inf)
            else:
                growths.append(log_total - prev_log)
        prev_log = log_total

        unconverged = [s for s in segments if not s.converged]
        window = growths[-GROWTH_WINDOW:]
        if len(window) == GROWTH_WINDOW and all(g < limit_growth for g in window) and math.isfinite(log_total):
            if unconverged:
                diagnostics.append(
                    f"{len(unconverged)} outer segment(s) hit the cell limit at X={half_width:g}"
                )
                break
            estimate = _complete_tails(f, lo, hi, lower, upper, log_total, cfg)
            if estimate is not None:
                logger.info(f"{label}: proper, log estimate {estimate:.6g} at X={half_width:g}")
                return ProprietyVerdict(
                    status=VerdictStatus.PROPER,
                    estimate=_exp_or_none(estimate),
                    log_estimate=estimate,
                    partial_integrals=partials,
                    evidence=f"partials stable over the last {GROWTH_WINDOW} doublings; tails added",
                    diagnostics=diagnostics,
                )
            diagnostics.append(f"tail completion did not converge at X={half_width:g}")

    window = growths[-GROWTH_WINDOW:]
    if len(window) == GROWTH_WINDOW and all(g > limit_growth for g in window):
        side = growth_source
        if not side:
            side = "xi -> -inf tail" if left_new > right_new else "xi -> +inf tail"
        if bound is None:
            logger.info(f"{label}: divergent ({side})")
            return ProprietyVerdict(
                status=VerdictStatus.DIVERGENT,
                partial_integrals=partials,
                evidence=f"growth beyond the factor on the last {GROWTH_WINDOW} doublings, driven by the {side}",
                diagnostics=diagnostics,
            )
        below = [p.truncation for p in partials if p.tail_log_value < p.tail_bound_log]
        if not below:
            logger.info(f"{label}: divergent ({side}, {bound.name} bound respected)")
            return ProprietyVerdict(
                status=VerdictStatus.DIVERGENT,
                partial_integrals=partials,
                evidence=f"{side} grows without limit and exceeds the {bound.name} lower bound at every truncation",
                diagnostics=diagnostics,
            )
        diagnostics.append(f"tail partial fell below the {bound.name} bound at X={below}")

    logger.warning(f"{label}: inconclusive after {len(partials)} truncation levels")
    return ProprietyVerdict(
        status=VerdictStatus.INCONCLUSIVE,
        partial_integrals=partials,
        evidence="neither stabilisation nor sustained growth",
        diagnostics=diagnostics,
    )


def _complete_tails(
    f: LogFn, lo: float, hi: float, lower: float, upper: float, log_total: float, cfg: QuadConfig
) -> Optional[float]:
    """Adds the xi-tails beyond the box; None if a tail integral fails."""
    pieces = [log_total]
    for start, open_end in ((lo, lower == -np.inf), (hi, upper == np.inf)):
        if not open_end:
            continue
        res: LogQuadResult = log_integrate_tail(f, start, tol=cfg.cell_tol, limit=cfg.cell_limit)
        if not (res.converged and res.log_value < np.inf):
            return None
        pieces.append(res.log_value)
    return _log_sum(pieces)


def _sqrt_anchor(prior: PriorSpec, lower: float) -> Optional[float]:
    return -0.5 if prior.family in SQRT_FAMILIES and lower == -0.5 else None


def _untruncated(prior: PriorSpec) -> bool:
    return prior.xi_lower is None and prior.xi_upper is None


# Analytic lower bounds used as divergence evidence

def log_divergence_lower_bound_mdi_gp(z: np.ndarray, T: float) -> float:
    if T < 1.0:
        raise DomainError(f"truncation T must be at least 1, got {T}")
    m = len(z)
    res = log_integrate(lambda v: -m * np.log(v) + v, 1.0, T)
    return res.log_value - math.log(m) - m * math.log(z[-1])


def divergence_lower_bound_mdi_gp(data: ExcessSample, T: float) -> float:
    """(1/(m z_m^m)) * integral_1^T v^-m e^v dv, below the MDI GP tail partial over (-T, -1)."""
    return _exp_or_inf(log_divergence_lower_bound_mdi_gp(data.z, T))


def log_divergence_lower_bound_jeffreys_gev(n: int, delta_n: float, T: float) -> float:
    if n < 2:
        raise DomainError(f"the Jeffreys GEV bound needs n >= 2, got {n}")
    if T < 3.0:
        raise DomainError(f"truncation T must be at least 3, got {T}")
    if not delta_n > 0.0:
        raise DomainError(f"delta_n must be positive, got {delta_n}")
    log_c_n = (
        -n * math.log(n)
        + log_gamma(float(n))
        + log_gamma(float(n - 1))
        + (1 - n) * math.log(delta_n)
        + (1 - n) * math.log(n - 1)
    )
    res = log_integrate(
        lambda x: (2.0 - n + ALZER_LAMBDA * x - EULER_GAMMA) * np.log1p(x), 3.0, T
    )
    return log_c_n + 0.5 * math.log(JEFFREYS_GEV_LOWER_C) + res.log_value


def divergence_lower_bound_jeffreys_gev(n: int, delta_n: float, T: float) -> float:
    """C(n) c^(1/2) * integral_3^T (1+xi)^(2-n+lambda xi-gamma) dxi."""
    return _exp_or_inf(log_divergence_lower_bound_jeffreys_gev(n, delta_n, T))


def log_divergence_lower_bound_mdi_gev(n: int, span: float, T: float) -> float:
    if n < 2:
        raise DomainError(f"the MDI GEV bound needs n >= 2, got {n}")
    if T < 1.0:
        raise DomainError(f"truncation T must be at least 1, got {T}")
    if not span > 0.0:
        raise DomainError(f"y_n - y_1 must be positive, got {span}")
    res = log_integrate(lambda x: (1 - n) * np.log(x) + EULER_GAMMA * x, 1.0, T)
    return (
        log_gamma(float(n - 1))
        - n * math.log(n)
        + (1 - n) * math.log(span)
        - EULER_GAMMA
        + res.log_value
    )


def divergence_lower_bound_mdi_gev(n: int, span: float, T: float) -> float:
    """(n-2)! n^-n (y_n-y_1)^(1-n) e^-gamma * integral_1^T x^(1-n) e^(gamma x) dx."""
    return _exp_or_inf(log_divergence_lower_bound_mdi_gev(n, span, T))


# Normalising constants

def estimate_gp_const(
    data: ExcessSample, prior: PriorSpec, cfg: Optional[QuadConfig] = None
) -> ProprietyVerdict:
    """C_m for the GP posterior under `prior`."""
    if prior.model != "gp":
        raise UsageError(f"estimate_gp_const needs a GP prior, got {prior.family.value}")
    cfg = cfg or QuadConfig()
    support = xi_support(prior)
    f = _OuterIntegrand(prior, gp_inner_log_integral(data, cfg))

    bound = None
    if prior.family == PriorFamily.MDI_GP and _untruncated(prior):
        z = data.z
        bound = _TailBound("left", -1.0, lambda T: log_divergence_lower_bound_mdi_gp(z, T), "MDI GP")

    label = f"C_{data.m} [{prior.family.value}]"
    return _run_levels(lambda k: f, support, cfg, _sqrt_anchor(prior, support[0]), bound, False, label, "")


def estimate_gev_const(
    data: BlockMaximaSample, prior: PriorSpec, cfg: Optional[QuadConfig] = None
) -> ProprietyVerdict:
    """K_n for the GEV posterior under `prior`, with sigma integrated out analytically."""
    if prior.model != "gev":
        raise UsageError(f"estimate_gev_const needs a GEV prior, got {prior.family.value}")
    cfg = cfg or QuadConfig()
    support = xi_support(prior)
    sqrt_at = _sqrt_anchor(prior, support[0])
    label = f"K_{data.n} [{prior.family.value}]"

    if data.n == 1:
        y1 = data.maxima[0]

        def level_integrand(k: int) -> LogFn:
            return _OuterIntegrand(prior, _single_maximum_inner(y1, cfg.log_u_half_width * 2.0 ** k, cfg))

        return _run_levels(level_integrand, support, cfg, sqrt_at, None, True, label, "phi-leg (single maximum)")

    f = _OuterIntegrand(prior, gev_inner_log_integral(data, cfg), constant=log_gamma(float(data.n)))
    bound = None
    if _untruncated(prior):
        n, spacings = data.n, data.spacings
        if prior.family == PriorFamily.JEFFREYS_GEV:
            bound = _TailBound(
                "right", 3.0, lambda T: log_divergence_lower_bound_jeffreys_gev(n, spacings[-1], T), "Jeffreys GEV"
            )
        elif prior.family == PriorFamily.MDI_GEV:
            bound = _TailBound(
                "left", -1.0, lambda T: log_divergence_lower_bound_mdi_gev(n, spacings[-1], T), "MDI GEV"
            )
    return _run_levels(lambda k: f, support, cfg, sqrt_at, bound, False, label, "")

"""
Adaptive random-walk Metropolis for the GP, GEV and NHPP posteriors.

The sampler works on (ln sigma, xi) or (mu, ln sigma, xi); the target
includes the +ln sigma Jacobian of that change of variables. The proposal
covariance and scale adapt during burn-in only and are frozen afterwards.
"""
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Dict, List, Optional, Tuple, Union

import numpy as np

from app.core.exceptions import DomainError, ProprietyRefusal, UsageError
from app.core.specfun import EULER_GAMMA
from app.schemas.mcmc import Chain, Diagnostics, McmcConfig, ReturnLevelSummary
from app.schemas.params import BlockMaximaSample, ExcessSample, NhppData
from app.schemas.prior import PriorFamily, PriorSpec
from app.services.evd_service import gev_quantile_raw, gp_quantile_raw
from app.services.posterior_service import gev_log_posterior, gp_log_posterior, nhpp_log_posterior

logger = logging.getLogger(__name__)

Sample = Union[ExcessSample, BlockMaximaSample, NhppData]
LogTarget = Callable[[np.ndarray], float]

GP_NAMES = ["sigma", "xi"]
GEV_NAMES = ["mu", "sigma", "xi"]
INITIAL_XI = 0.1
MIN_SCALE = 1e-4
FULL_COV_AFTER = 2  # adaptation windows before switching from diagonal to full covariance


# Propriety gate

def propriety_status(prior: PriorSpec, size: int) -> Tuple[str, str]:
    """
    Proved status of a (prior, sample size) pair: ("proper" | "improper" |
    "open", claim). GEV rows also cover the NHPP model with n = m.
    """
    family = prior.family
    if family == PriorFamily.JEFFREYS_GP:
        return "proper", "Jeffreys GP prior gives a proper posterior for m >= 1"
    if family == PriorFamily.MDI_GP_TRUNC:
        return "proper", "truncated MDI GP prior gives a proper posterior for m >= 1"
    if family == PriorFamily.MDI_GP:
        return "improper", "MDI GP prior gives an improper posterior for every sample size"
    if family == PriorFamily.UNIFORM_GP:
        if size >= 3:
            return "proper", "uniform GP prior gives a proper posterior for m >= 3"
        if size == 2:
            return "open", "propriety of the uniform GP prior at m = 2 is not settled"
        return "improper", "uniform GP prior gives an improper posterior for m = 1"

    if size == 1:
        return "improper", "a single block maximum gives an improper posterior for every prior in the class"
    if family == PriorFamily.JEFFREYS_GEV:
        return "improper", "Jeffreys GEV prior gives an improper posterior for every sample size"
    if family == PriorFamily.MDI_GEV:
        return "improper", "MDI GEV prior gives an improper posterior for every sample size"
    if family == PriorFamily.MDI_GEV_TRUNC:
        return "proper", "truncated MDI GEV prior gives a proper posterior for n >= 2"
    if family == PriorFamily.JEFFREYS_GEV_TRUNC:
        return "proper", "Jeffreys GEV prior truncated above gives a proper posterior for n >= 2"
    if size >= 4:
        return "proper", "uniform GEV prior gives a proper posterior for n >= 4"
    return "open", f"propriety of the uniform GEV prior at n = {size} is not settled"


def check_propriety(prior: PriorSpec, size: int, override: bool = False) -> str:
    status, claim = propriety_status(prior, size)
    if status == "proper":
        return claim
    if override:
        logger.warning(f"Sampling {prior.family.value} with {size} observations despite: {claim}")
        return claim
    what = "improper" if status == "improper" else "not known to be proper"
    raise ProprietyRefusal(
        f"refusing to sample: the posterior under {prior.family.value} with {size} observations is {what} "
        f"({claim}); pass --override-propriety to sample anyway",
        claim=claim,
    )


# Targets in transformed coordinates

def _model_of(data: Sample) -> str:
    if isinstance(data, ExcessSample):
        return "gp"
    if isinstance(data, NhppData):
        return "nhpp"
    return "gev"


def _size_of(data: Sample) -> int:
    return data.n if isinstance(data, BlockMaximaSample) else data.m


def log_target(data: Sample, prior: PriorSpec) -> LogTarget:
    model = _model_of(data)
    if model == "gp":
        def target(theta: np.ndarray) -> float:
            log_sigma, xi = theta
            return gp_log_posterior(data, prior, math.exp(log_sigma), xi) + log_sigma
    else:
        posterior = nhpp_log_posterior if model == "nhpp" else gev_log_posterior

        def target(theta: np.ndarray) -> float:
            mu, log_sigma, xi = theta
            return posterior(data, prior, mu, math.exp(log_sigma), xi) + log_sigma

    log_sigma_at = 0 if model == "gp" else 1

    def safe(theta: np.ndarray) -> float:
        if not np.all(np.isfinite(theta)) or abs(theta[log_sigma_at]) > 700.0:
            return -np.inf
        value = target(theta)
        return value if math.isfinite(value) else -np.inf

    return safe


def _pwm_start(values: np.ndarray) -> Tuple[float, float]:
    """Gumbel (mu, sigma) from probability-weighted moments of the sorted values."""
    n = len(values)
    b0 = float(np.mean(values))
    if n < 2:
        sigma = max(abs(b0), 1.0)
        return b0 - EULER_GAMMA * sigma, sigma
    b1 = float(np.sum(np.arange(n) / (n - 1) * np.sort(values))) / n
    sigma = (2.0 * b1 - b0) / math.log(2.0)
    if not sigma > 0.0:
        sigma = 1.0
    return b0 - EULER_GAMMA * sigma, sigma


def initial_state(data: Sample, prior: PriorSpec, target: Optional[LogTarget] = None) -> np.ndarray:
    """On-support starting point: (ln mean z, 0.1) for GP, Gumbel PWM estimates for GEV/NHPP."""
    target = target or log_target(data, prior)
    if isinstance(data, ExcessSample):
        candidates = [np.array([math.log(float(np.mean(data.z))), xi]) for xi in (INITIAL_XI, 0.0, 0.5)]
    else:
        values = data.y if isinstance(data, BlockMaximaSample) else data.x
        mu, sigma = _pwm_start(values)
        candidates = [np.array([mu, math.log(sigma), xi]) for xi in (INITIAL_XI, 0.0)]
        # Gumbel start below the smallest value with a wide scale
        lo, span = float(values[0]), float(values[-1] - values[0]) or 1.0
        candidates.append(np.array([lo - span, math.log(2.0 * span), INITIAL_XI]))
    for theta in candidates:
        if math.isfinite(target(theta)):
            return theta
    raise DomainError("could not find a starting point inside the posterior support")


# Sampler

def metropolis(
    target: LogTarget,
    start: np.ndarray,
    cfg: McmcConfig,
    rng: Optional[np.random.Generator] = None,
) -> Tuple[np.ndarray, np.ndarray, float, np.ndarray, float]:
    """
    Random-walk Metropolis with burn-in adaptation. Returns retained draws,
    their log-target values, post burn-in acceptance rate, the frozen
    proposal covariance and scale.
    """
    rng = rng if rng is not None else np.random.default_rng(cfg.seed)
    dim = len(start)
    state = np.array(start, dtype=float)
    current = target(state)
    if not math.isfinite(current):
        raise DomainError("starting point has zero posterior density")

    cov = np.eye(dim) * 0.01
    scale = 2.38 / math.sqrt(dim)
    window: List[np.ndarray] = []
    window_accepts = 0
    windows_done = 0
    accepts = 0

    kept = (cfg.iterations - cfg.burn_in + cfg.thinning - 1) // cfg.thinning
    draws = np.empty((kept, dim))
    log_values = np.empty(kept)
    chol = np.linalg.cholesky(cov)
    k = 0

    for it in range(cfg.iterations):
        proposal = state + scale * (chol @ rng.standard_normal(dim))
        value = target(proposal)
        if math.isfinite(value) and math.log1p(-rng.random()) < value - current:
            state, current = proposal, value
            if it >= cfg.burn_in:
                accepts += 1
            else:
                window_accepts += 1

        if it < cfg.burn_in:
            window.append(state.copy())
            if len(window) == cfg.adapt_window:
                rate = window_accepts / cfg.adapt_window
                scale = max(scale * math.exp(rate - cfg.target_acceptance), MIN_SCALE)
                history = np.array(window)
                windows_done += 1
                if windows_done >= FULL_COV_AFTER:
                    est = np.cov(history, rowvar=False) + 1e-10 * np.eye(dim)
                else:
                    est = np.diag(np.var(history, axis=0) + 1e-10)
                try:
                    chol = np.linalg.cholesky(est)
                    cov = est
                except np.linalg.LinAlgError:
                    logger.warning("Proposal covariance not positive definite; keeping the previous one")
                window, window_accepts = [], 0
        elif (it - cfg.burn_in) % cfg.thinning == 0:
            draws[k] = state
            log_values[k] = current
            k += 1

    rate = accepts / (cfg.iterations - cfg.burn_in)
    return draws, log_values, rate, cov, scale


def _natural(model: str, theta: np.ndarray) -> np.ndarray:
    out = theta.copy()
    col = 0 if model == "gp" else 1
    out[:, col] = np.exp(theta[:, col])
    return out


def _check_model(data: Sample, prior: PriorSpec) -> str:
    model = _model_of(data)
    if prior.model != ("gp" if model == "gp" else "gev"):
        raise UsageError(f"prior {prior.family.value} cannot be used with the {model.upper()} model")
    return model


def _run_chain(data: Sample, prior: PriorSpec, cfg: McmcConfig, rng: Optional[np.random.Generator]) -> Chain:
    model = _model_of(data)
    target = log_target(data, prior)
    start = initial_state(data, prior, target)
    logger.info(f"Sampling {model} posterior under {prior.family.value}: {cfg.iterations} iterations, seed {cfg.seed}")
    draws, log_values, rate, cov, scale = metropolis(target, start, cfg, rng)
    logger.info(f"Acceptance rate {rate:.3f} after burn-in ({len(draws)} draws kept)")
    return Chain(
        model=model,
        names=GP_NAMES if model == "gp" else GEV_NAMES,
        draws=_natural(model, draws),
        log_posterior=log_values,
        acceptance_rate=rate,
        proposal_cov=cov,
        proposal_scale=scale,
        seed=cfg.seed,
        threshold=data.threshold if isinstance(data, ExcessSample) else 0.0,
    )


def _run_stream(args: Tuple[Sample, PriorSpec, McmcConfig, np.random.SeedSequence]) -> Chain:
    data, prior, cfg, stream = args
    return _run_chain(data, prior, cfg, np.random.default_rng(stream))


def sample(
    data: Sample,
    prior: PriorSpec,
    cfg: Optional[McmcConfig] = None,
    override: bool = False,
    rng: Optional[np.random.Generator] = None,
) -> Chain:
    cfg = cfg or McmcConfig()
    _check_model(data, prior)
    check_propriety(prior, _size_of(data), override)
    return _run_chain(data, prior, cfg, rng)


def sample_chains(
    data: Sample,
    prior: PriorSpec,
    cfg: Optional[McmcConfig] = None,
    chains: int = 2,
    override: bool = False,
) -> List[Chain]:
    """
    Independent chains on SeedSequence.spawn streams of the master seed,
    run in worker processes. Results come back in stream order, so a seeded
    run gives the same chains whatever the worker count.
    """
    cfg = cfg or McmcConfig()
    if chains < 1:
        raise DomainError(f"chains must be positive, got {chains}")
    _check_model(data, prior)
    check_propriety(prior, _size_of(data), override)

    streams = np.random.SeedSequence(cfg.seed).spawn(chains)
    jobs = [(data, prior, cfg, s) for s in streams]
    if chains == 1 or cfg.workers == 1:
        return [_run_stream(job) for job in jobs]

    workers = min(chains, cfg.workers) if cfg.workers else None
    logger.info(f"Running {chains} chains in parallel")
    with ProcessPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(_run_stream, jobs))


# Return levels

def return_level(chain: Chain, return_period: float) -> np.ndarray:
    """Per-draw quantile at probability 1 - 1/T; GP levels are shifted by the threshold."""
    if not (math.isfinite(return_period) and return_period > 1.0):
        raise DomainError(f"return period must exceed 1, got {return_period}")
    q = 1.0 - 1.0 / return_period
    sigma, xi = chain.column("sigma"), chain.column("xi")
    out = np.empty(len(sigma))
    if chain.model == "gp":
        for i in range(len(out)):
            out[i] = chain.threshold + gp_quantile_raw(q, sigma[i], xi[i])
    else:
        mu = chain.column("mu")
        for i in range(len(out)):
            out[i] = gev_quantile_raw(q, mu[i], sigma[i], xi[i])
    return out


def summarise_return_level(chain: Chain, return_period: float, level: float = 0.9) -> ReturnLevelSummary:
    if not 0.0 < level < 1.0:
        raise DomainError(f"credible level must lie in (0, 1), got {level}")
    values = return_level(chain, return_period)
    tail = 0.5 * (1.0 - level)
    lower, median, upper = np.quantile(values, [tail, 0.5, 1.0 - tail])
    return ReturnLevelSummary(
        return_period=return_period,
        mean=float(np.mean(values)),
        median=float(median),
        lower=float(lower),
        upper=float(upper),
        level=level,
        draws=len(values),
    )


# Diagnostics

def effective_sample_size(x: np.ndarray) -> float:
    """Geyer initial positive sequence estimate; autocovariances by FFT."""
    x = np.asarray(x, dtype=float)
    n = len(x)
    if n < 4:
        return float(n)
    centred = x - x.mean()
    if np.allclose(centred, 0.0):
        return 1.0
    size = 1 << (2 * n - 1).bit_length()
    spectrum = np.fft.rfft(centred, size)
    acov = np.fft.irfft(spectrum * np.conj(spectrum), size)[:n] / n
    rho = acov / acov[0]

    total = 0.0
    for t in range(0, n - 1, 2):
        pair = rho[t] + rho[t + 1]
        if pair <= 0.0:
            break
        total += pair
    tau = max(2.0 * total - 1.0, 1.0 / n)
    return float(min(n / tau, n))


def split_rhat(columns: List[np.ndarray]) -> float:
    """Split-chain potential scale reduction over one or more chains of one coordinate."""
    halves = []
    for x in columns:
        half = len(x) // 2
        if half < 2:
            return math.nan
        halves.extend([x[:half], x[half:2 * half]])
    parts = np.array(halves)
    length = parts.shape[1]
    within = float(np.mean(np.var(parts, axis=1, ddof=1)))
    between = length * float(np.var(parts.mean(axis=1), ddof=1))
    if within == 0.0:
        return 1.0 if between == 0.0 else math.inf
    pooled = (length - 1) / length * within + between / length
    return math.sqrt(pooled / within)


def diagnostics(chains: Union[Chain, List[Chain]]) -> Diagnostics:
    group = chains if isinstance(chains, list) else [chains]
    names = group[0].names
    ess: Dict[str, float] = {}
    rhat: Dict[str, float] = {}
    for name in names:
        cols = [c.column(name) for c in group]
        ess[name] = sum(effective_sample_size(c) for c in cols)
        rhat[name] = split_rhat(cols)
    return Diagnostics(
        acceptance_rate=float(np.mean([c.acceptance_rate for c in group])),
        draws=sum(len(c.draws) for c in group),
        ess=ess,
        rhat=rhat,
    )


def merge_chains(chains: List[Chain]) -> Chain:
    """Pools the retained draws of several chains of one fit."""
    if len(chains) == 1:
        return chains[0]
    first = chains[0]
    return Chain(
        model=first.model,
        names=first.names,
        draws=np.concatenate([c.draws for c in chains]),
        log_posterior=np.concatenate([c.log_posterior for c in chains]),
        acceptance_rate=float(np.mean([c.acceptance_rate for c in chains])),
        proposal_cov=first.proposal_cov,
        proposal_scale=first.proposal_scale,
        seed=first.seed,
        threshold=first.threshold,
    )

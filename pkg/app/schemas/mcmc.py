from typing import Dict, List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.core.config import settings


class McmcConfig(BaseModel):
    iterations: int = Field(default_factory=lambda: settings.MCMC_ITERATIONS)
    burn_in: int = Field(default_factory=lambda: settings.MCMC_BURN_IN)
    thinning: int = Field(default_factory=lambda: settings.MCMC_THINNING)
    target_acceptance: float = Field(default_factory=lambda: settings.MCMC_TARGET_ACCEPTANCE)
    adapt_window: int = Field(default_factory=lambda: settings.MCMC_ADAPT_WINDOW)
    seed: int = Field(default_factory=lambda: settings.MCMC_SEED)
    workers: Optional[int] = Field(default_factory=lambda: settings.MCMC_WORKERS)

    @model_validator(mode="after")
    def _check_counts(self) -> "McmcConfig":
        if min(self.iterations, self.thinning, self.adapt_window) < 1 or self.burn_in < 0:
            raise ValueError("iterations, thinning and adapt_window must be positive; burn_in non-negative")
        if self.burn_in >= self.iterations:
            raise ValueError("burn_in must be smaller than iterations")
        if not 0.0 < self.target_acceptance < 1.0:
            raise ValueError("target_acceptance must lie in (0, 1)")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be a 64-bit non-negative integer")
        if self.workers is not None and self.workers < 1:
            raise ValueError("workers must be positive")
        return self


class Chain(BaseModel):
    """Retained draws in natural coordinates plus sampler metadata."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    model: str
    names: List[str]
    draws: np.ndarray
    log_posterior: np.ndarray
    acceptance_rate: float
    proposal_cov: np.ndarray
    proposal_scale: float
    seed: int
    threshold: float = 0.0

    def column(self, name: str) -> np.ndarray:
        return self.draws[:, self.names.index(name)]


class Diagnostics(BaseModel):
    acceptance_rate: float
    draws: int
    ess: Dict[str, float]
    rhat: Dict[str, float]


class ReturnLevelSummary(BaseModel):
    return_period: float
    mean: float
    median: float
    lower: float
    upper: float
    level: float = 0.9
    draws: Optional[int] = None

from typing import Any, Optional

from pydantic import BaseModel, Field, model_validator

from app.schemas.mcmc import McmcConfig
from app.schemas.prior import PriorFamily, PriorSpec
from app.schemas.propriety import QuadConfig

SCHEMA_NAME = "evprior-report"
SCHEMA_VERSION = "1.0"

MODELS = ("gp", "gev", "nhpp")
INGEST_MODES = ("excesses", "maxima", "raw+threshold", "raw+blocks")


class RunConfig(BaseModel):
    """Parameters of one CLI invocation after merging settings, config file and flags."""
    model: Optional[str] = None
    prior: Optional[PriorFamily] = None
    xi_lower: Optional[float] = None
    xi_upper: Optional[float] = None
    threshold: Optional[float] = None
    block_size: Optional[int] = None
    n_blocks: Optional[int] = None
    mode: Optional[str] = None
    input: Optional[str] = None
    output: Optional[str] = None
    chain_output: Optional[str] = None
    data_output: Optional[str] = None
    override_propriety: bool = False
    return_period: Optional[float] = None
    mu: float = 0.0
    sigma: float = 1.0
    xi: float = 0.0
    count: int = 100
    grid_min: float = -3.0
    grid_max: float = 3.0
    grid_points: int = 121
    chains: int = 1
    mcmc: McmcConfig = Field(default_factory=McmcConfig)
    quad: QuadConfig = Field(default_factory=QuadConfig)

    @model_validator(mode="after")
    def _check(self) -> "RunConfig":
        if self.model is not None and self.model not in MODELS:
            raise ValueError(f"model must be one of {', '.join(MODELS)}")
        if self.mode is not None and self.mode not in INGEST_MODES:
            raise ValueError(f"mode must be one of {', '.join(INGEST_MODES)}")
        if self.block_size is not None and self.block_size < 1:
            raise ValueError("block_size must be a positive integer")
        if self.count < 1 or self.chains < 1:
            raise ValueError("count and chains must be positive")
        if self.grid_points < 2 or not self.grid_min < self.grid_max:
            raise ValueError("grid needs at least two points and grid_min < grid_max")
        return self

    def prior_spec(self) -> PriorSpec:
        return PriorSpec(family=self.prior, xi_lower=self.xi_lower, xi_upper=self.xi_upper)


class ReportDocument(BaseModel):
    schema_name: str = SCHEMA_NAME
    version: str = SCHEMA_VERSION
    command: str
    result: Any

    def to_json_dict(self) -> dict:
        return {
            "schema": self.schema_name,
            "version": self.version,
            "command": self.command,
            "result": self.result,
        }

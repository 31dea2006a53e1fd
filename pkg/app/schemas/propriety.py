import math
from enum import Enum
from typing import List, Optional

from pydantic import BaseModel, Field, field_validator

from app.core.config import settings


class VerdictStatus(str, Enum):
    PROPER = "proper"
    DIVERGENT = "divergent"
    INCONCLUSIVE = "inconclusive"


class QuadConfig(BaseModel):
    """Truncation box, doubling schedule and tolerances of the propriety lab."""
    xi_half_width: float = Field(default_factory=lambda: settings.QUAD_XI_HALF_WIDTH)
    log_u_half_width: float = Field(default_factory=lambda: settings.QUAD_LOG_U_HALF_WIDTH)
    doubling_limit: int = Field(default_factory=lambda: settings.QUAD_DOUBLING_LIMIT)
    cell_tol: float = Field(default_factory=lambda: settings.QUAD_CELL_TOL)
    growth_factor: float = Field(default_factory=lambda: settings.QUAD_GROWTH_FACTOR)
    cell_limit: int = Field(default_factory=lambda: settings.QUAD_CELL_LIMIT)

    @field_validator("xi_half_width", "log_u_half_width", "cell_tol")
    @classmethod
    def _positive(cls, v: float) -> float:
        if not (math.isfinite(v) and v > 0.0):
            raise ValueError("quadrature widths and tolerances must be positive")
        return v

    @field_validator("growth_factor")
    @classmethod
    def _above_one(cls, v: float) -> float:
        if not v > 1.0:
            raise ValueError("growth_factor must exceed 1")
        return v

    @field_validator("doubling_limit")
    @classmethod
    def _enough_doublings(cls, v: int) -> int:
        if v < 4:
            raise ValueError("doubling_limit must be at least 4")
        return v

    @field_validator("cell_limit")
    @classmethod
    def _cells(cls, v: int) -> int:
        if v < 2:
            raise ValueError("cell_limit must be at least 2")
        return v


class PartialIntegral(BaseModel):
    """Truncated integral at one doubling level, kept in log form."""
    truncation: float
    log_value: float
    value: Optional[float] = None
    tail_log_value: Optional[float] = None
    tail_bound_log: Optional[float] = None


class ProprietyVerdict(BaseModel):
    status: VerdictStatus
    estimate: Optional[float] = None
    log_estimate: Optional[float] = None
    partial_integrals: List[PartialIntegral] = []
    evidence: str = ""
    diagnostics: List[str] = []


class TheoremRow(BaseModel):
    claim: str
    prior: str
    model: str
    sample_size: int
    dataset: str
    expected: str
    observed: str
    estimate: Optional[float] = None
    passed: bool
    detail: str = ""


class TheoremReport(BaseModel):
    rows: List[TheoremRow]
    passed: bool
    failures: int


class BoundCheck(BaseModel):
    name: str
    value: float
    bound: float
    holds: bool


class BoundSuiteReport(BaseModel):
    excesses: List[float]
    maxima: List[float]
    checks: List[BoundCheck]
    passed: bool

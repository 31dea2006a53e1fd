import math
from enum import Enum
from typing import Optional

from pydantic import BaseModel, model_validator


class PriorFamily(str, Enum):
    JEFFREYS_GP = "jeffreys_gp"
    MDI_GP = "mdi_gp"
    MDI_GP_TRUNC = "mdi_gp_trunc"
    UNIFORM_GP = "uniform_gp"
    JEFFREYS_GEV = "jeffreys_gev"
    JEFFREYS_GEV_TRUNC = "jeffreys_gev_trunc"
    MDI_GEV = "mdi_gev"
    MDI_GEV_TRUNC = "mdi_gev_trunc"
    UNIFORM_GEV = "uniform_gev"

    @property
    def model(self) -> str:
        return "gp" if self.value.endswith("_gp") or self.value.endswith("_gp_trunc") else "gev"


class PriorSpec(BaseModel):
    """A catalog prior plus its truncation hyperparameters."""
    family: PriorFamily
    xi_lower: Optional[float] = None
    xi_upper: Optional[float] = None

    @model_validator(mode="after")
    def _check_truncation(self) -> "PriorSpec":
        for name in ("xi_lower", "xi_upper"):
            value = getattr(self, name)
            if value is not None and not math.isfinite(value):
                raise ValueError(f"{name} must be finite when given")
        if self.family in (PriorFamily.MDI_GP_TRUNC, PriorFamily.MDI_GEV_TRUNC) and self.xi_lower is None:
            self.xi_lower = -1.0
        if self.family == PriorFamily.JEFFREYS_GEV_TRUNC and self.xi_upper is None:
            raise ValueError("jeffreys_gev_trunc needs an explicit xi_upper; there is no default")
        if self.family == PriorFamily.JEFFREYS_GEV_TRUNC and self.xi_upper <= -0.5:
            raise ValueError("xi_upper must exceed -1/2 for jeffreys_gev_trunc")
        if self.xi_lower is not None and self.xi_upper is not None and self.xi_lower >= self.xi_upper:
            raise ValueError("xi_lower must be below xi_upper")
        return self

    @property
    def model(self) -> str:
        return self.family.model


class JeffreysGevComponents(BaseModel):
    """Pieces of the Jeffreys GEV xi-component: pi_xi^2 = (T1 + T2) / xi^4."""
    xi: float
    p: float
    q: float
    T1: float
    T2: float
    pi_xi_sq: float


class PriorCatalogEntry(BaseModel):
    family: PriorFamily
    model: str
    density: str
    support: str
    hyperparameters: str

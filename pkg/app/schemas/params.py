import math
from typing import List, Optional

import numpy as np
from pydantic import BaseModel, field_validator, model_validator


def _finite(value: float, name: str) -> float:
    if not math.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value}")
    return value


def _strictly_increasing(values: List[float], name: str) -> List[float]:
    if not values:
        raise ValueError(f"{name} must contain at least one value")
    for v in values:
        _finite(v, name)
    if any(b <= a for a, b in zip(values[:-1], values[1:])):
        raise ValueError(f"{name} must be strictly increasing (sorted, no ties)")
    return values


class GpParams(BaseModel):
    """Generalized Pareto scale and shape."""
    sigma: float
    xi: float

    @field_validator("sigma")
    @classmethod
    def _positive_scale(cls, v: float) -> float:
        if not (math.isfinite(v) and v > 0.0):
            raise ValueError(f"sigma must be positive and finite, got {v}")
        return v

    @field_validator("xi")
    @classmethod
    def _finite_shape(cls, v: float) -> float:
        return _finite(v, "xi")


class GevParams(GpParams):
    """GEV location, scale and shape."""
    mu: float

    @field_validator("mu")
    @classmethod
    def _finite_location(cls, v: float) -> float:
        return _finite(v, "mu")


class ExcessSample(BaseModel):
    """Ordered threshold excesses z_1 < ... < z_m, all positive."""
    threshold: float = 0.0
    excesses: List[float]

    @field_validator("excesses")
    @classmethod
    def _check(cls, v: List[float]) -> List[float]:
        _strictly_increasing(v, "excesses")
        if v[0] <= 0.0:
            raise ValueError("excesses must all be positive")
        return v

    @property
    def m(self) -> int:
        return len(self.excesses)

    @property
    def z(self) -> np.ndarray:
        return np.asarray(self.excesses, dtype=float)


class BlockMaximaSample(BaseModel):
    """Ordered block maxima y_1 < ... < y_n."""
    maxima: List[float]
    block_size: Optional[int] = None

    @field_validator("maxima")
    @classmethod
    def _check(cls, v: List[float]) -> List[float]:
        return _strictly_increasing(v, "maxima")

    @property
    def n(self) -> int:
        return len(self.maxima)

    @property
    def y(self) -> np.ndarray:
        return np.asarray(self.maxima, dtype=float)

    @property
    def spacings(self) -> np.ndarray:
        """delta_i = y_i - y_1 for i = 2..n."""
        y = self.y
        return y[1:] - y[0]


class NhppData(BaseModel):
    """Exceedances x_1 < ... < x_m of a threshold u, with the notional block count."""
    threshold: float
    exceedances: List[float]
    n_blocks: Optional[int] = None

    @field_validator("exceedances")
    @classmethod
    def _check(cls, v: List[float]) -> List[float]:
        return _strictly_increasing(v, "exceedances")

    @model_validator(mode="after")
    def _above_threshold(self) -> "NhppData":
        _finite(self.threshold, "threshold")
        if self.exceedances[0] <= self.threshold:
            raise ValueError("all exceedances must lie above the threshold")
        if self.n_blocks is None:
            self.n_blocks = len(self.exceedances)
        elif self.n_blocks < 1:
            raise ValueError("n_blocks must be a positive integer")
        return self

    @property
    def m(self) -> int:
        return len(self.exceedances)

    @property
    def x(self) -> np.ndarray:
        return np.asarray(self.exceedances, dtype=float)

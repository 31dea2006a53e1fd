"""
Turns raw numeric input into validated samples: threshold excesses, block
maxima or NHPP exceedances.
"""
import logging
from typing import Optional, Union

import numpy as np
from pydantic import ValidationError

from app.core.exceptions import IngestionError, TieError, UsageError
from app.repositories.file_repository import FileRepository
from app.schemas.params import BlockMaximaSample, ExcessSample, NhppData
from app.schemas.report import INGEST_MODES

logger = logging.getLogger(__name__)

Ingested = Union[ExcessSample, BlockMaximaSample, NhppData]


def _check_ties(values: np.ndarray) -> np.ndarray:
    ordered = np.sort(np.asarray(values, dtype=float))
    tied = ordered[1:][np.diff(ordered) == 0.0]
    if tied.size:
        raise TieError(tied)
    return ordered


def _require(values: np.ndarray, what: str) -> None:
    if values.size == 0:
        raise IngestionError(f"No {what} left after ingestion")


def _build(model_cls, **kwargs):
    try:
        return model_cls(**kwargs)
    except ValidationError as e:
        raise IngestionError(f"Invalid {model_cls.__name__}: {e.errors()[0]['msg']}")


def excesses_from_values(values: np.ndarray, threshold: float = 0.0) -> ExcessSample:
    """Values that already are excesses over the threshold."""
    values = np.asarray(values, dtype=float)
    _require(values, "excesses")
    if np.any(values <= 0.0):
        raise IngestionError(f"Excesses must be positive, found {float(values.min()):g}")
    return _build(ExcessSample, threshold=threshold, excesses=_check_ties(values).tolist())


def excesses_from_raw(values: np.ndarray, threshold: float) -> ExcessSample:
    """z = x - u for every x > u."""
    values = np.asarray(values, dtype=float)
    above = values[values > threshold]
    _require(above, f"values above the threshold {threshold:g}")
    logger.info(f"{above.size} of {values.size} values exceed u={threshold:g}")
    return excesses_from_values(above - threshold, threshold)


def maxima_from_values(values: np.ndarray, block_size: Optional[int] = None) -> BlockMaximaSample:
    values = np.asarray(values, dtype=float)
    _require(values, "maxima")
    return _build(BlockMaximaSample, maxima=_check_ties(values).tolist(), block_size=block_size)


def block_maxima(values: np.ndarray, block_size: int) -> BlockMaximaSample:
    """Per-block maxima of consecutive blocks; a trailing partial block is dropped."""
    if block_size is None or block_size < 1:
        raise UsageError("raw+blocks mode needs a positive block size")
    values = np.asarray(values, dtype=float)
    n_blocks = values.size // block_size
    if n_blocks == 0:
        raise IngestionError(f"{values.size} values do not fill one block of {block_size}")
    dropped = values.size - n_blocks * block_size
    if dropped:
        logger.warning(f"Dropping a trailing partial block of {dropped} values")
    maxima = values[: n_blocks * block_size].reshape(n_blocks, block_size).max(axis=1)
    return maxima_from_values(maxima, block_size)


def nhpp_from_raw(values: np.ndarray, threshold: float, n_blocks: Optional[int] = None) -> NhppData:
    values = np.asarray(values, dtype=float)
    above = values[values > threshold]
    _require(above, f"values above the threshold {threshold:g}")
    return _build(NhppData, threshold=threshold, exceedances=_check_ties(above).tolist(), n_blocks=n_blocks)


def ingest_values(
    values: np.ndarray,
    mode: str,
    model: Optional[str] = None,
    threshold: Optional[float] = None,
    block_size: Optional[int] = None,
    n_blocks: Optional[int] = None,
) -> Ingested:
    if mode not in INGEST_MODES:
        raise UsageError(f"Unknown ingestion mode {mode!r}; choose one of {', '.join(INGEST_MODES)}")
    if model == "nhpp":
        if mode != "raw+threshold" or threshold is None:
            raise UsageError("the NHPP model needs raw+threshold input with a threshold")
        return nhpp_from_raw(values, threshold, n_blocks)
    if mode == "excesses":
        return excesses_from_values(values, threshold if threshold is not None else 0.0)
    if mode == "maxima":
        return maxima_from_values(values, block_size)
    if mode == "raw+threshold":
        if threshold is None:
            raise UsageError("raw+threshold mode needs a threshold")
        return excesses_from_raw(values, threshold)
    return block_maxima(values, block_size)


def ingest_file(
    path: str,
    mode: str,
    model: Optional[str] = None,
    threshold: Optional[float] = None,
    block_size: Optional[int] = None,
    n_blocks: Optional[int] = None,
) -> Ingested:
    values = FileRepository.read_values(path)
    sample = ingest_values(values, mode, model, threshold, block_size, n_blocks)
    logger.info(f"Ingested {path} as {type(sample).__name__} ({mode})")
    return sample

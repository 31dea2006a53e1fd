import logging
import sys
from typing import Any, Iterable

from pydantic import ValidationError

from app.core.exceptions import UsageError
from app.repositories.file_repository import FileRepository
from app.schemas.prior import PriorSpec
from app.schemas.report import ReportDocument, RunConfig
from app.services.ingestion_service import Ingested, ingest_file

logger = logging.getLogger(__name__)

DEFAULT_MODES = {"gp": "excesses", "gev": "maxima", "nhpp": "raw+threshold"}


def require(cfg: RunConfig, *names: str) -> None:
    missing = [n for n in names if getattr(cfg, n) is None]
    if missing:
        flags = ", ".join("--" + n.replace("_", "-") for n in missing)
        raise UsageError(f"missing required option(s): {flags}")


def prior_spec(cfg: RunConfig) -> PriorSpec:
    require(cfg, "prior")
    try:
        spec = cfg.prior_spec()
    except ValidationError as e:
        raise UsageError(f"Invalid prior: {e.errors()[0]['msg']}")
    if cfg.model is not None and spec.model != ("gp" if cfg.model == "gp" else "gev"):
        raise UsageError(f"prior {spec.family.value} cannot be used with the {cfg.model.upper()} model")
    return spec


def load_sample(cfg: RunConfig) -> Ingested:
    require(cfg, "model", "input")
    mode = cfg.mode or DEFAULT_MODES[cfg.model]
    if cfg.model == "gp" and mode not in ("excesses", "raw+threshold"):
        raise UsageError(f"the GP model takes excesses or raw+threshold input, not {mode}")
    if cfg.model == "gev" and mode not in ("maxima", "raw+blocks"):
        raise UsageError(f"the GEV model takes maxima or raw+blocks input, not {mode}")
    return ingest_file(cfg.input, mode, cfg.model, cfg.threshold, cfg.block_size, cfg.n_blocks)


def summary(lines: Iterable[str]) -> None:
    """Human-readable summary on stderr; stdout is reserved for the document."""
    for line in lines:
        print(line, file=sys.stderr)


def emit(command: str, result: Any, cfg: RunConfig) -> ReportDocument:
    document = ReportDocument(command=command, result=result)
    text = FileRepository.write_document(document, cfg.output)
    if not cfg.output:
        print(text)
    return document

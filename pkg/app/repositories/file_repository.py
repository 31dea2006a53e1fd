import json
import logging
import os
from typing import Any, Dict, Iterable, Optional

import numpy as np
import pandas as pd

from app.core.config import settings
from app.core.exceptions import IngestionError
from app.schemas.mcmc import Chain
from app.schemas.report import ReportDocument

logger = logging.getLogger(__name__)

# Any run of commas, semicolons or whitespace separates values
VALUE_SEPARATOR = r"[,;\s]+"


def _json_default(value: Any) -> Any:
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    if hasattr(value, "model_dump"):
        return value.model_dump(mode="json")
    raise TypeError(f"{type(value).__name__} is not JSON serialisable")


def _finite_or_none(value: Any) -> Any:
    """JSON has no inf/nan: write them as null."""
    if isinstance(value, float) and not np.isfinite(value):
        return None
    if isinstance(value, dict):
        return {k: _finite_or_none(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_finite_or_none(v) for v in value]
    return value


class FileRepository:

    @staticmethod
    def validate_input(path: str) -> None:
        """Extension, existence and size checks before any parsing."""
        if not any(path.lower().endswith(ext) for ext in settings.allowed_extensions):
            raise IngestionError(
                f"Invalid file type for {path}. Only {', '.join(settings.allowed_extensions)} files are allowed."
            )
        if not os.path.isfile(path):
            raise IngestionError(f"Input file {path} does not exist")
        size = os.path.getsize(path)
        if size > settings.max_file_size:
            raise IngestionError(f"Input file {path} is {size} bytes, above the {settings.max_file_size} byte limit")

    @staticmethod
    def _read_frame(path: str) -> pd.DataFrame:
        if path.lower().endswith(".xlsx"):
            return pd.read_excel(path, header=None, dtype=str)
        return pd.read_csv(
            path, sep=VALUE_SEPARATOR, engine="python", header=None, dtype=str, skip_blank_lines=True
        )

    @staticmethod
    def read_values(path: str) -> np.ndarray:
        """
        The single numeric column of a delimited text or Excel file, in file
        order. A first row with no numeric cell is taken as a header and
        skipped; more than one column is an error.
        """
        FileRepository.validate_input(path)
        try:
            raw = FileRepository._read_frame(path)
        except pd.errors.EmptyDataError:
            raise IngestionError(f"File {path} is empty")
        except pd.errors.ParserError as e:
            raise IngestionError(f"Could not parse {path}: {e}")
        except UnicodeDecodeError:
            raise IngestionError(f"File {path} is not valid text; save it as UTF-8")
        except ImportError as e:
            raise IngestionError(f"Cannot read {path}: {e}")
        except (OSError, ValueError) as e:
            logger.error(f"Error reading {path}: {e}")
            raise IngestionError(f"Could not read {path}: {e}")

        raw = raw.apply(lambda col: col.map(lambda v: v.strip() if isinstance(v, str) else v))
        raw = raw.replace("", np.nan).dropna(how="all")
        if raw.empty:
            raise IngestionError(f"File {path} is empty")

        numeric = raw.apply(pd.to_numeric, errors="coerce")
        if numeric.iloc[0].isna().all():
            logger.info(f"Skipping header row of {path}: {' '.join(raw.iloc[0].dropna())}")
            raw, numeric = raw.iloc[1:], numeric.iloc[1:]
        if raw.empty:
            raise IngestionError(f"File {path} holds no numeric values")

        # separators at line ends leave all-empty columns
        filled = raw.notna().any()
        raw, numeric = raw.loc[:, filled], numeric.loc[:, filled]
        if raw.shape[1] > 1:
            raise IngestionError(f"File {path} has {raw.shape[1]} columns; expected a single column of values")

        bad = raw.notna() & numeric.isna()
        if bad.to_numpy().any():
            token = raw[bad].stack().dropna().iloc[0]
            raise IngestionError(f"Non-numeric value {token!r} in {path}")

        values = numeric.stack().dropna().to_numpy(dtype=float)
        if values.size == 0:
            raise IngestionError(f"File {path} holds no numeric values")
        if not np.all(np.isfinite(values)):
            raise IngestionError(f"File {path} holds non-finite values")
        logger.info(f"Read {values.size} values from {path}")
        return values

    @staticmethod
    def write_document(document: ReportDocument, path: Optional[str] = None) -> str:
        """Writes the JSON document to path (or returns it only) and returns the text."""
        text = json.dumps(
            _finite_or_none(json.loads(json.dumps(document.to_json_dict(), default=_json_default))),
            indent=2,
            sort_keys=False,
        )
        if path:
            FileRepository._ensure_parent(path)
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(text + "\n")
            logger.info(f"Wrote {document.command} document to {path}")
        return text

    @staticmethod
    def write_chain(chain: Chain, path: str, chain_id: int = 0) -> None:
        """One retained draw per row: parameter columns then the log posterior."""
        frame = pd.DataFrame(chain.draws, columns=chain.names)
        frame["log_posterior"] = chain.log_posterior
        frame.insert(0, "chain", chain_id)
        FileRepository._ensure_parent(path)
        frame.to_csv(path, index=False, mode="w" if chain_id == 0 else "a", header=chain_id == 0)
        logger.info(f"Wrote {len(frame)} draws to {path}")

    @staticmethod
    def write_table(columns: Dict[str, Iterable], path: str) -> None:
        frame = pd.DataFrame(columns)
        FileRepository._ensure_parent(path)
        frame.to_csv(path, index=False)
        logger.info(f"Wrote {len(frame)} rows to {path}")

    @staticmethod
    def write_values(values: np.ndarray, path: str, header: str = "value") -> None:
        FileRepository.write_table({header: np.asarray(values, dtype=float)}, path)

    @staticmethod
    def _ensure_parent(path: str) -> None:
        parent = os.path.dirname(os.path.abspath(path))
        os.makedirs(parent, exist_ok=True)

import json

import numpy as np
import pandas as pd
import pytest

from app.core.exceptions import IngestionError, TieError, UsageError
from app.repositories.file_repository import FileRepository
from app.schemas.params import BlockMaximaSample, ExcessSample, NhppData
from app.schemas.report import ReportDocument
from app.services.ingestion_service import (
    block_maxima,
    excesses_from_raw,
    excesses_from_values,
    ingest_file,
    ingest_values,
)


def _write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def test_raw_values_over_threshold():
    sample = excesses_from_raw(np.array([0.5, 1.2, 3.0]), 1.0)
    assert isinstance(sample, ExcessSample)
    assert sample.threshold == 1.0
    assert sample.excesses == pytest.approx([0.2, 2.0])


def test_nothing_above_threshold():
    with pytest.raises(IngestionError):
        excesses_from_raw(np.array([0.5, 0.7]), 1.0)


def test_excesses_are_sorted_and_positive():
    assert excesses_from_values(np.array([3.0, 1.0, 2.0])).excesses == [1.0, 2.0, 3.0]
    with pytest.raises(IngestionError):
        excesses_from_values(np.array([1.0, 0.0]))


def test_ties_are_rejected():
    with pytest.raises(TieError) as exc:
        excesses_from_values(np.array([1.0, 2.0, 2.0, 3.0]))
    assert exc.value.values == [2.0]


def test_block_maxima():
    values = np.array([1, 5, 2, 3, 4, 9, 0, 7, 8, 6], dtype=float)
    sample = block_maxima(values, 5)
    assert isinstance(sample, BlockMaximaSample)
    assert sample.maxima == [5.0, 9.0]
    assert sample.block_size == 5


def test_partial_block_is_dropped():
    sample = block_maxima(np.arange(12, dtype=float), 5)
    assert sample.maxima == [4.0, 9.0]


def test_block_size_must_be_positive():
    with pytest.raises(UsageError):
        block_maxima(np.arange(4.0), 0)
    with pytest.raises(IngestionError):
        block_maxima(np.arange(4.0), 5)


def test_nhpp_ingestion():
    data = ingest_values(np.array([0.1, 2.0, 1.5, 0.3]), "raw+threshold", model="nhpp", threshold=1.0, n_blocks=3)
    assert isinstance(data, NhppData)
    assert data.exceedances == [1.5, 2.0]
    assert data.n_blocks == 3
    with pytest.raises(UsageError):
        ingest_values(np.array([1.0]), "maxima", model="nhpp")


def test_unknown_mode():
    with pytest.raises(UsageError):
        ingest_values(np.array([1.0]), "quantiles")


def test_read_values_skips_header(tmp_path):
    path = _write(tmp_path, "flows.csv", "flow\n1.5\n2.5\n\n0.5\n")
    np.testing.assert_array_equal(FileRepository.read_values(path), [1.5, 2.5, 0.5])


def test_read_values_trailing_separators(tmp_path):
    path = _write(tmp_path, "flows.txt", "1.0,\n2.0;\n3.0 \n")
    np.testing.assert_array_equal(FileRepository.read_values(path), [1.0, 2.0, 3.0])


def test_read_values_rejects_several_columns(tmp_path):
    path = _write(tmp_path, "flows.csv", "date,value\n20240101,1.5\n20240102,2.5\n")
    with pytest.raises(IngestionError, match="2 columns"):
        FileRepository.read_values(path)
    path = _write(tmp_path, "flows.txt", "1.0; 3.0\n4.0 5.0\n")
    with pytest.raises(IngestionError, match="single column"):
        FileRepository.read_values(path)


def test_read_values_header_only(tmp_path):
    with pytest.raises(IngestionError, match="no numeric values"):
        FileRepository.read_values(_write(tmp_path, "flows.csv", "flow\n"))


def test_legacy_excel_is_not_accepted(tmp_path):
    with pytest.raises(IngestionError, match="Invalid file type"):
        FileRepository.read_values(_write(tmp_path, "maxima.xls", "1.0\n"))


def test_read_values_names_bad_token(tmp_path):
    path = _write(tmp_path, "flows.csv", "1.0\nabc\n2.0\n")
    with pytest.raises(IngestionError, match="abc"):
        FileRepository.read_values(path)


def test_empty_and_missing_files(tmp_path):
    with pytest.raises(IngestionError):
        FileRepository.read_values(_write(tmp_path, "empty.csv", ""))
    with pytest.raises(IngestionError):
        FileRepository.read_values(str(tmp_path / "missing.csv"))


def test_bad_extension(tmp_path):
    with pytest.raises(IngestionError, match="Invalid file type"):
        FileRepository.read_values(_write(tmp_path, "flows.json", "[1, 2]"))


def test_excel_input(tmp_path):
    path = str(tmp_path / "maxima.xlsx")
    pd.DataFrame({"annual_max": [3.2, 4.1, 2.7, 5.0]}).to_excel(path, index=False)
    sample = ingest_file(path, "maxima", model="gev")
    assert sample.maxima == [2.7, 3.2, 4.1, 5.0]


def test_write_document_maps_infinities_to_null(tmp_path):
    path = str(tmp_path / "out" / "doc.json")
    doc = ReportDocument(command="propriety", result={"estimate": float("inf"), "values": np.array([1.0, 2.0])})
    FileRepository.write_document(doc, path)
    with open(path) as fh:
        loaded = json.load(fh)
    assert loaded["schema"] == "evprior-report"
    assert loaded["result"] == {"estimate": None, "values": [1.0, 2.0]}

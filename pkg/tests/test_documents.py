import json
from pathlib import Path

import pytest

from app.cli.router import dispatch

GOLDEN = Path(__file__).parent / "golden"


def _emit(tmp_path, *argv):
    out = tmp_path / "result.json"
    code = dispatch(list(argv) + ["--output", str(out)])
    assert code == 0
    return json.loads(out.read_text())


def _golden(name):
    return json.loads((GOLDEN / name).read_text())


def _assert_matches(actual, expected, rel, where="document"):
    """'<number>' and '<list>' in a golden file pin the type only."""
    if expected == "<number>":
        assert isinstance(actual, (int, float)) and not isinstance(actual, bool), where
    elif expected == "<list>":
        assert isinstance(actual, list), where
    elif isinstance(expected, dict):
        assert isinstance(actual, dict), where
        assert set(actual) == set(expected), f"{where}: keys {sorted(actual)} != {sorted(expected)}"
        for key, value in expected.items():
            _assert_matches(actual[key], value, rel, f"{where}.{key}")
    elif isinstance(expected, list):
        assert isinstance(actual, list) and len(actual) == len(expected), where
        for i, (a, e) in enumerate(zip(actual, expected)):
            _assert_matches(a, e, rel, f"{where}[{i}]")
    elif isinstance(expected, float):
        assert actual == pytest.approx(expected, rel=rel, abs=1e-12), where
    else:
        assert actual == expected, where


def test_ingest_excesses_document(tmp_path):
    src = tmp_path / "excesses.csv"
    src.write_text("excess\n3.0\n1.0\n2.0\n")
    doc = _emit(tmp_path, "ingest", "--input", str(src), "--mode", "excesses")
    _assert_matches(doc, _golden("ingest_excesses.json"), rel=1e-12)


def test_ingest_maxima_document(tmp_path):
    src = tmp_path / "maxima.txt"
    src.write_text("4\n0\n2\n1\n")
    doc = _emit(tmp_path, "ingest", "--input", str(src), "--mode", "maxima")
    _assert_matches(doc, _golden("ingest_maxima.json"), rel=1e-12)


def test_simulate_document(tmp_path):
    doc = _emit(tmp_path, "simulate", "--model", "gp", "--sigma", "2", "--xi", "0.1", "--count", "3", "--seed", "9")
    _assert_matches(doc, _golden("simulate_gp.json"), rel=1e-12)
    assert all(v > 0.0 for v in doc["result"]["values"])


def test_priors_document(tmp_path):
    doc = _emit(
        tmp_path, "priors", "--prior", "mdi_gp_trunc",
        "--grid-min", "-1", "--grid-max", "1", "--grid-points", "3",
    )
    _assert_matches(doc, _golden("priors_mdi_gp_trunc.json"), rel=1e-12)


def test_propriety_document(tmp_path):
    src = tmp_path / "excesses.csv"
    src.write_text("2.0\n")
    doc = _emit(tmp_path, "propriety", "--model", "gp", "--prior", "mdi_gp_trunc", "--input", str(src))
    _assert_matches(doc, _golden("propriety_mdi_gp_trunc.json"), rel=1e-5)
    partials = doc["result"]["verdict"]["partial_integrals"]
    assert partials[0]["truncation"] == 4.0
    assert set(partials[0]) == {"truncation", "log_value", "value", "tail_log_value", "tail_bound_log"}

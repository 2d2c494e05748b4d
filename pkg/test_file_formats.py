"""
Test object file detection, reading and serialization helpers
"""
import json

import pandas as pd
import pytest

from dgmod import ExteriorData, exterior_module
from mf import mf_koszul_pair
from polyring import ParseError, Ring, RingMap
from reduce import equiv_check
from scenario import line_scenario
from simple_file_reader import detect_kind, parse_object, read_object_file, read_text
from utils import certificate_summary, export_to_csv, format_object, format_rank_table, results_frame

XY = Ring(("x", "y"), (1, 1))


def test_detect_kind():
    k = mf_koszul_pair(XY, "x", "y", 0)
    assert detect_kind(format_object(k)) == "mf"
    assert detect_kind(format_object(k, "json")) == "mf"
    assert detect_kind(format_object(line_scenario())) == "scenario"
    assert detect_kind("source: u\ntarget: x\nu = x^2\n") == "map"
    ext = ExteriorData(XY, (XY.poly("x - y"),))
    assert detect_kind(format_object(exterior_module(ext))) == "dg"
    assert detect_kind(format_object(equiv_check(k, k))) == "certificate"
    with pytest.raises(ParseError):
        detect_kind("{not json")


def test_expected_kind_is_enforced():
    with pytest.raises(ParseError):
        parse_object(format_object(line_scenario()), "mf")


def test_bom_is_stripped(tmp_path):
    path = tmp_path / "k.mf"
    path.write_bytes(b"\xef\xbb\xbf" + format_object(mf_koszul_pair(XY, "x", "y", 0)).encode("utf-8"))
    assert read_text(path).startswith("ring:")
    obj, error = read_object_file(path, "mf")
    assert error is None
    assert obj == mf_koszul_pair(XY, "x", "y", 0)


def test_read_object_file_errors(tmp_path):
    obj, error = read_object_file(tmp_path / "missing.mf")
    assert obj is None
    assert "not found" in error
    empty = tmp_path / "empty.mf"
    empty.write_text("")
    obj, error = read_object_file(empty)
    assert obj is None
    assert "empty" in error


def test_json_round_trip_of_ring_map():
    phi = RingMap.from_assignments(Ring(("u",)), Ring(("x",)), {"u": "x^2"})
    data = json.loads(format_object(phi, "json"))
    assert data["type"] == "map"
    assert parse_object(format_object(phi, "json")) == phi


def test_format_object_rejects_unknown_types():
    with pytest.raises(TypeError):
        format_object(42)


def test_rank_table():
    df = format_rank_table([mf_koszul_pair(XY, "x", "y", 0), mf_koszul_pair(XY, "y", "x")], ["a", "b"])
    assert list(df["name"]) == ["a", "b"]
    assert list(df["graded"]) == [True, False]
    assert int(df["rank_zero"].sum()) == 2


def test_certificate_summary():
    k = mf_koszul_pair(XY, "x", "y", 0)
    summary = certificate_summary(equiv_check(k, k))
    assert summary["verified"]
    assert summary["source_rank"] == 2


def test_results_frame_and_csv(tmp_path):
    rows = [{"criterion": 1, "name": "validator law", "checks": 3, "passed": True, "seconds": 0.1234,
             "detail": "ok"}]
    df = results_frame(rows)
    assert list(df.columns) == ["criterion", "name", "checks", "passed", "seconds", "detail"]
    assert df["seconds"].iloc[0] == 0.12
    path = export_to_csv(df, str(tmp_path / "results.csv"))
    assert pd.read_csv(path)["name"].iloc[0] == "validator law"


if __name__ == "__main__":
    test_detect_kind()
    test_expected_kind_is_enforced()
    test_format_object_rejects_unknown_types()
    test_json_round_trip_of_ring_map()
    test_rank_table()
    test_certificate_summary()
    print("file format tests passed")

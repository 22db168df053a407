import json
from dataclasses import dataclass

import numpy as np
import pytest

from inner_clt.report_formatter import emit, format_cell, format_float, to_json


@dataclass
class Row:
    N: int
    value: float
    verdict: str


class TestCells:
    @pytest.mark.parametrize("value, text", [
        (0.1, "0.10000000000000001"),
        (2.0, "2"),
        (float("nan"), "NaN"),
        (float("-inf"), "-Infinity"),
    ])
    def test_floats(self, value, text):
        assert format_float(value) == text

    @pytest.mark.parametrize("value, text", [
        (None, ""),
        (True, "true"),
        (7, "7"),
        (np.int64(7), "7"),
        (np.bool_(False), "false"),
        (np.float64(0.5), "0.5"),
        (complex(1, -2), "1-2j"),
        ("PASS", "PASS"),
    ])
    def test_cells(self, value, text):
        assert format_cell(value) == text


class TestEmit:
    def test_header_only_csv(self, tmp_path):
        path = emit([], "csv", tmp_path / "empty.csv", fields=["name", "pass"])
        assert path.read_text() == "name,pass\n"

    def test_csv_field_order(self, tmp_path):
        rows = [Row(N=4, value=0.1, verdict="PASS")]
        path = emit(rows, "csv", tmp_path / "rows.csv", fields=["verdict", "N", "value"])
        assert path.read_text().splitlines() == ["verdict,N,value", "PASS,4,0.10000000000000001"]

    def test_json_rows(self, tmp_path):
        rows = [Row(N=4, value=0.25, verdict="FAIL"), {"N": 8, "value": 1.5, "verdict": "PASS"}]
        path = emit(rows, "json", tmp_path / "rows.json")
        data = json.loads(path.read_text())
        assert data == [{"N": 4, "value": 0.25, "verdict": "FAIL"},
                        {"N": 8, "value": 1.5, "verdict": "PASS"}]

    def test_unknown_format(self, tmp_path):
        with pytest.raises(ValueError, match="Invalid format"):
            emit([], "xlsx", tmp_path / "rows.xlsx")


class TestJson:
    def test_shortest_float_repr(self):
        assert to_json({"x": 0.1}) == '{\n  "x": 0.1\n}'

    def test_floats_round_trip(self):
        values = [1 / 3, 2 ** -60, 1e300, -0.0]
        assert json.loads(to_json(values)) == values

    def test_complex_and_arrays(self):
        text = to_json({"z": 1 + 2j, "a": np.array([1.0, 3.0]), "empty": []})
        assert json.loads(text) == {"z": [1.0, 2.0], "a": [1.0, 3.0], "empty": []}

    def test_keys_keep_insertion_order(self):
        text = to_json({"b": 1, "a": None, "c": True})
        assert list(json.loads(text)) == ["b", "a", "c"]
        assert "null" in text and "true" in text

    def test_deterministic(self):
        value = {"rows": [Row(N=n, value=1 / 3 * n, verdict="PASS") for n in range(5)]}
        assert to_json(value) == to_json(value)

import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from dispeq import records


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_float_roundtrip_exact(x):
    assert json.loads(records.dumps({"x": x}))["x"] == x


def test_special_values_and_types():
    out = json.loads(records.dumps({"n": math.nan, "i": np.int64(3), "c": 1 + 2j,
                                    "a": np.array([1.0, 2.0]), "b": np.bool_(True), "z": None}))
    assert out == {"n": "NaN", "i": 3, "c": {"re": 1.0, "im": 2.0}, "a": [1.0, 2.0], "b": True, "z": None}


def test_dumps_deterministic():
    obj = {"b": [1.0, {"x": 0.1}], "a": "s"}
    assert records.dumps(obj) == records.dumps(obj)
    assert list(json.loads(records.dumps(obj))) == ["b", "a"]


def test_csv_roundtrip(tmp_path):
    rows = np.array([[1.0, 0.1], [2.0, 1 / 3]])
    p = tmp_path / "t.csv"
    records.write_csv(str(p), ["a", "b"], rows, "test")
    assert p.read_text().splitlines()[0] == "# dispeq-test v1"
    cols, data = records.read_csv(str(p))
    assert cols == ["a", "b"]
    np.testing.assert_array_equal(data, rows)


def test_csv_header_required(tmp_path):
    p = tmp_path / "t.csv"
    p.write_text("a,b\n1,2\n")
    with pytest.raises(ValueError):
        records.read_csv(str(p))

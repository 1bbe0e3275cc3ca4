import json
import math
import pathlib
from collections import namedtuple

import numpy as np
import pytest

from dcone import formats
from dcone.exception import FieldFormatError
from dcone.obstacle_model import ObstaclePair, TransformRecord

FIXTURES_DIR = pathlib.Path(__file__).parent / "fixtures"


def test_shipped_pairs():
    assert formats.shipped_pairs() == ["case1", "case2", "case3", "case3_boundary", "rotated"]
    pair, record = formats.read_pair("case2")
    assert pair == ObstaclePair(-1.0, 0.0, -1.0, 2.0, 0.0, 0.0)
    assert record is None


def test_read_pair_with_transform():
    pair, record = formats.read_pair(str(FIXTURES_DIR / "pairs" / "stored_transform.json"))
    assert pair.a2 == 1.0
    assert record == TransformRecord(0.0, (0.5, 0.0), 2.0)


def test_read_pair_missing():
    with pytest.raises(FileNotFoundError):
        formats.read_pair("case9")


def test_read_pair_incomplete(tmp_path):
    path = tmp_path / "pair.json"
    path.write_text(json.dumps({"a1": -1.0, "c1": -1.0}))
    with pytest.raises(ValueError, match="a1, c1, a2 and c2"):
        formats.read_pair(str(path))


def test_write_pair(tmp_path):
    pair = ObstaclePair(-1.0, 0.25, -2.0, 1.0, 0.25, 3.0)
    record = TransformRecord(0.0, (0.0, 0.25), 1.0)
    path = formats.write_pair(tmp_path / "out" / "pair.json", pair, record)
    assert formats.read_pair(str(path)) == (pair, record)


def test_dumps_spells_out_non_finite():
    data = json.loads(
        formats.dumps({"slope": math.inf, "low": -math.inf, "gap": math.nan, "v": np.float64(2)})
    )
    assert data == {"slope": "inf", "low": "-inf", "gap": None, "v": 2.0}


def test_dumps_converts_numpy():
    text = formats.dumps({"mask": np.array([True, False]), "n": np.int64(3), "t": (1, 2)})
    assert json.loads(text) == {"mask": [True, False], "n": 3, "t": [1, 2]}


def test_dumps_rejects_unknown_objects():
    with pytest.raises(TypeError):
        formats.dumps({"x": object()})


def test_field_csv_round_trip(tmp_path, mu_field):
    path = formats.write_field_csv(tmp_path / "field.csv", mu_field)
    assert path.read_text().splitlines()[0] == ",".join(formats.FIELD_COLUMNS)
    field = formats.read_field_csv(path)
    assert field.grid == mu_field.grid
    assert np.array_equal(field.u, mu_field.u)
    assert np.array_equal(field.lower, mu_field.lower)
    assert field.lambda1 == pytest.approx(-4.0)
    assert field.lambda2 == pytest.approx(4.0)


def test_field_csv_without_masks(tmp_path, mu_field):
    path = formats.write_field_csv(tmp_path / "field.csv", mu_field)
    lines = path.read_text().splitlines()
    stripped = [",".join(line.split(",")[:5]) for line in lines]
    bare = tmp_path / "bare.csv"
    bare.write_text("\n".join(stripped) + "\n")
    field = formats.read_field_csv(bare)
    assert np.array_equal(field.upper, mu_field.upper)


@pytest.mark.parametrize(
    "filename, message",
    [("field_bad_header.csv", "expected columns"), ("field_not_square.csv", "square")],
)
def test_read_field_rejects(filename, message):
    with pytest.raises(FieldFormatError, match=message):
        formats.read_field_csv(FIXTURES_DIR / filename)


def test_write_trace_csv(tmp_path):
    Trace = namedtuple("Trace", ["radii", "values", "differences"])
    path = formats.write_trace_csv(tmp_path / "trace.csv", Trace([0.4, 0.2], [3.5, 3.25], [0.25]))
    assert path.read_text().splitlines() == [
        "r,W,dW",
        "0.40000000000000002,3.5,0.25",
        "0.20000000000000001,3.25,",
    ]


def test_write_polyline_csv(tmp_path):
    path = formats.write_polyline_csv(tmp_path / "curve.csv", [[0.0, 0.0], [0.5, -0.25]])
    assert path.read_text().splitlines() == ["x1,x2", "0,0", "0.5,-0.25"]


def test_write_summary_csv(tmp_path):
    Item = namedtuple("Item", ["name", "passed", "detail"])
    items = [Item("01", True, {"b": 1, "a": math.inf}), Item("02", False, {})]
    path = formats.write_summary_csv(tmp_path / "summary.csv", items)
    lines = path.read_text().splitlines()
    assert lines[0] == "item,passed,detail"
    assert lines[1] == '01,true,"{""a"":""inf"",""b"":1}"'
    assert lines[2] == "02,false,{}"

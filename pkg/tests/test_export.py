import json

import numpy as np
import pytest

from densitycut import export


def test_pgm_roundtrip_and_orientation():
    mask = np.zeros((3, 2), dtype=bool)
    mask[0, 1] = True
    text = export.mask_to_pgm(mask)
    lines = text.splitlines()
    assert lines[:3] == ["P2", "3 2", "255"]
    # first image row is the top (largest j)
    assert lines[3] == "0 255 255"
    np.testing.assert_array_equal(export.read_pgm(text), mask)


def test_read_pgm_rejects_other_formats():
    with pytest.raises(ValueError):
        export.read_pgm("P5\n1 1\n255\n0\n")


def test_report_json_is_stable_and_strict():
    rep = {"b": np.float64(1.5), "a": [np.int64(2), float("nan")], "ok": np.bool_(True)}
    text = export.dumps_report(rep)
    assert text == export.dumps_report(dict(reversed(list(rep.items()))))
    assert json.loads(text) == {"a": [2, None], "b": 1.5, "ok": True}


def test_csv_floats_roundtrip():
    text = export.rows_to_csv(["x", "y"], [[0.1, "a"], [1 / 3, True]])
    assert text.splitlines() == ["x,y", "0.1,a", f"{1 / 3!r},True"]

import numpy as np
import pytest
from numpy.testing import assert_allclose

from errors import ParseError, NotHermitianError
from serialization.storage import (save_json, load_json, matrix_to_dict, matrix_from_dict,
                                   curve_to_dict, lifted_curve_from_dict, schedule_to_dict,
                                   schedule_from_dict)
from dynamics.evolution import HamiltonianSchedule, horizontal_lift
from geometry.state_space import standard_purification


def test_matrix_format():
    M = np.array([[1.0, 2.0 - 1.0j], [0.5j, -3.0]])
    data = matrix_to_dict(M)
    assert data["rows"] == 2 and data["cols"] == 2
    assert data["data"][1] == [2.0, -1.0]
    assert_allclose(matrix_from_dict(data), M)


@pytest.mark.parametrize("data", [
    {"rows": 2, "cols": 2, "data": [[1.0, 0.0]]},
    {"rows": 1, "cols": 1, "data": [["a", 0.0]]},
    {"cols": 1, "data": [[1.0, 0.0]]},
    [[1.0, 0.0]],
])
def test_malformed_matrices(data):
    with pytest.raises(ParseError):
        matrix_from_dict(data)


def test_save_json_creates_directories(tmp_path):
    path = tmp_path / "nested" / "deeper" / "report.json"
    save_json({"value": 1.5}, str(path))
    assert load_json(str(path)) == {"value": 1.5}


def test_save_json_in_working_directory(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    save_json({"ok": True}, "report.json")
    assert load_json("report.json") == {"ok": True}


def test_load_json_reports_parse_errors(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("[1, 2", encoding="utf-8")
    with pytest.raises(ParseError):
        load_json(str(path))


def test_load_json_rejects_invalid_utf8(tmp_path):
    path = tmp_path / "binary.json"
    path.write_bytes(b'\xff\xfe{"rows": 1}')
    with pytest.raises(ParseError):
        load_json(str(path))


def test_schedule_keeps_interpolation(pauli):
    schedule = HamiltonianSchedule.constant(pauli["x"], 0.0, 1.0, 4)
    piecewise = HamiltonianSchedule(times=schedule.times, operators=schedule.operators,
                                    interpolation="piecewise")
    restored = schedule_from_dict(schedule_to_dict(piecewise))
    assert restored.interpolation == "piecewise"
    assert_allclose(restored.matrices(), piecewise.matrices())


def test_schedule_errors(pauli):
    data = schedule_to_dict(HamiltonianSchedule.constant(pauli["x"], 0.0, 1.0, 2))
    with pytest.raises(ParseError):
        schedule_from_dict(dict(data, interpolation="cubic"))
    data["matrices"][1] = matrix_to_dict([[0.0, 1.0], [0.0, 0.0]])
    with pytest.raises(NotHermitianError):
        schedule_from_dict(data)


def test_lifted_curve_from_saved_samples(rotation_curve):
    curve = rotation_curve(steps=50)
    lift = horizontal_lift(curve, standard_purification(curve.start))
    restored = lifted_curve_from_dict(curve_to_dict(lift))
    assert len(restored) == 51
    assert restored.length() == pytest.approx(lift.length(), abs=1e-12)

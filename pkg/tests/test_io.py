import io
import json
import warnings

import numpy as np
import pytest

from mppose.errors import SchemaError
from mppose.geometry import line_residual, point_residual
from mppose.io import (
    REPORT_HEADER,
    ReportRow,
    dumps_instance,
    instance_from_dict,
    instance_from_scene,
    instance_to_dict,
    load_instance,
    read_report,
    write_report,
)
from mppose.scene import SceneConfig, generate_scene


@pytest.mark.parametrize("noise", [0.0, 1.0])
def test_round_trip_is_byte_stable(tmp_path, noise):
    s = generate_scene(SceneConfig(seed=4, noise_px=noise, n_points=5, n_lines=5))
    text = dumps_instance(instance_from_scene(s))
    path = tmp_path / "a.json"
    path.write_text(text)
    assert dumps_instance(load_instance(path)) == text


def test_loaded_ground_truth_has_zero_residuals(tmp_path):
    s = generate_scene(SceneConfig(seed=5, n_points=4, n_lines=4))
    path = tmp_path / "a.json"
    path.write_text(dumps_instance(instance_from_scene(s)))
    inst = load_instance(path)
    T = inst.ground_truth
    for obs, d in zip(inst.points, s.point_depths):
        assert np.linalg.norm(point_residual(T, inst.rig, obs, d)) < 1e-9
    for obs in inst.lines:
        assert np.linalg.norm(line_residual(T, inst.rig, obs)) < 1e-9


def _minimal():
    s = generate_scene(SceneConfig(seed=1))
    return instance_to_dict(instance_from_scene(s)), s


def test_bearings_and_normals_accepted():
    d, s = _minimal()
    for p, obs in zip(d["points"], s.points):
        p.pop("pixel")
        p["bearing"] = obs.bearing.tolist()
    for l, obs in zip(d["lines"], s.lines):
        l.pop("pixel_endpoints")
        l["plane_normal"] = obs.plane.normal.tolist()
    inst = instance_from_dict(d)
    assert inst.points[0].pixel is None
    assert np.allclose(inst.lines[0].plane.normal, s.lines[0].plane.normal)
    again = instance_from_dict(json.loads(dumps_instance(inst)))
    assert dumps_instance(again) == dumps_instance(inst)


def test_pixels_win_with_warning():
    d, s = _minimal()
    d["points"][0]["bearing"] = [1.0, 0.0, 0.0]
    with pytest.warns(UserWarning, match="pixel"):
        inst = instance_from_dict(d)
    assert np.allclose(inst.points[0].bearing, s.points[0].bearing)


def test_invalid_rotation_names_the_field():
    d, _ = _minimal()
    d["rig"][1]["rotation"] = [1, 0, 0, 0, 1, 0, 0, 0, -1]
    with pytest.raises(SchemaError, match=r"rig\[1\]\.rotation"):
        instance_from_dict(d)


@pytest.mark.parametrize(
    "mutate,pattern",
    [
        (lambda d: d["points"][0].pop("world"), r"points\[0\].*world"),
        (lambda d: d["lines"][1].update(cam=9), r"lines\[1\]\.cam"),
        (lambda d: d["rig"][0].update(translation=[1, 2]), r"rig\[0\]\.translation"),
        (lambda d: d["points"][1].update(pixel=["a", 1]), r"points\[1\]\.pixel"),
        (lambda d: d.update(rig=[]), r"rig"),
    ],
)
def test_schema_errors(mutate, pattern):
    d, _ = _minimal()
    mutate(d)
    with pytest.raises(SchemaError, match=pattern):
        instance_from_dict(d)


def test_bad_json_reports_line(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{\n  "rig": [\n')
    with pytest.raises(SchemaError, match="line"):
        load_instance(path)
    with pytest.raises(SchemaError):
        load_instance(tmp_path / "missing.json")


def test_report_round_trip():
    rows = [
        ReportRow("p2l1", 0.0, 0, 4, 2, 1e-12, 3e-13, 120.5, "ok"),
        ReportRow("p1l2", 1.0, 7, 0, 0, float("inf"), float("inf"), 80.0, "no_solution"),
    ]
    buf = io.StringIO()
    write_report(rows, buf)
    text = buf.getvalue()
    assert text.splitlines()[0] == ",".join(REPORT_HEADER)
    back = read_report(io.StringIO(text))
    assert back[0] == rows[0]
    assert back[1].status == "no_solution" and np.isinf(back[1].rot_err_deg)


def test_report_header_is_checked():
    with pytest.raises(SchemaError):
        read_report(io.StringIO("solver,trial\np2l1,0\n"))

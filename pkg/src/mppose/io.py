"""Instance files (JSON) and per-trial report rows (CSV).

Instance layout::

    {
      "rig": [{"rotation": [9 reals, row-major], "translation": [3],
               "fx": .., "fy": .., "cx": .., "cy": .., "width": .., "height": ..}],
      "points": [{"cam": i, "world": [3], "bearing": [3] | "pixel": [2]}],
      "lines": [{"cam": i, "world_direction": [3], "world_moment": [3],
                 "plane_normal": [3] | "pixel_endpoints": [4]}],
      "ground_truth": {"rotation": [9], "translation": [3]},   # optional
      "seed": int, "noise_px": real                          # optional
    }

When a feature carries both pixels and a bearing/normal, the pixels win.
"""

from __future__ import annotations

import csv
import json
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable, List, Optional, Tuple

import numpy as np

from .errors import DegenerateInput, InvalidRotation, SchemaError
from .geometry import (
    Camera,
    CameraRig,
    InterpretationPlane,
    LineCorrespondence,
    PluckerLine,
    PointCorrespondence,
    RigidTransform,
    interpretation_plane_from_bearings,
)

REPORT_HEADER = (
    "solver",
    "noise_px",
    "trial",
    "n_solutions",
    "n_solutions_cheiral",
    "rot_err_deg",
    "trans_err",
    "solve_time_us",
    "status",
)


@dataclass(frozen=True)
class Instance:
    rig: CameraRig
    points: Tuple[PointCorrespondence, ...] = ()
    lines: Tuple[LineCorrespondence, ...] = ()
    ground_truth: Optional[RigidTransform] = None
    seed: Optional[int] = None
    noise_px: Optional[float] = None


# --------------------------------------------------------------------------
# reading


def _reals(obj: dict, key: str, n: int, where: str) -> np.ndarray:
    if key not in obj:
        raise SchemaError(f"{where}: missing field '{key}'")
    v = obj[key]
    if not isinstance(v, list) or len(v) != n:
        raise SchemaError(f"{where}.{key}: expected a list of {n} numbers")
    try:
        a = np.array([float(x) for x in v])
    except (TypeError, ValueError):
        raise SchemaError(f"{where}.{key}: entries must be numbers") from None
    if not np.all(np.isfinite(a)):
        raise SchemaError(f"{where}.{key}: entries must be finite")
    return a


def _real(obj: dict, key: str, where: str) -> float:
    if key not in obj:
        raise SchemaError(f"{where}: missing field '{key}'")
    try:
        return float(obj[key])
    except (TypeError, ValueError):
        raise SchemaError(f"{where}.{key}: expected a number") from None


def _int(obj: dict, key: str, where: str) -> int:
    v = obj.get(key)
    if not isinstance(v, int) or isinstance(v, bool):
        raise SchemaError(f"{where}: field '{key}' must be an integer")
    return v


def _transform(obj: dict, where: str, frames=(None, None)) -> RigidTransform:
    R = _reals(obj, "rotation", 9, where).reshape(3, 3)
    t = _reals(obj, "translation", 3, where)
    try:
        return RigidTransform(R, t, *frames)
    except InvalidRotation as exc:
        raise SchemaError(f"{where}.rotation: {exc}") from None


def _camera(obj: dict, where: str) -> Camera:
    ext = _transform(obj, where, ("camera_i", "camera"))
    K = np.array(
        [
            [_real(obj, "fx", where), 0.0, _real(obj, "cx", where)],
            [0.0, _real(obj, "fy", where), _real(obj, "cy", where)],
            [0.0, 0.0, 1.0],
        ]
    )
    return Camera(ext, K, _int(obj, "width", where), _int(obj, "height", where))


def _cam_index(obj: dict, where: str, n: int) -> int:
    i = _int(obj, "cam", where)
    if not 0 <= i < n:
        raise SchemaError(f"{where}.cam: index {i} outside rig of {n} cameras")
    return i


def _point(obj: dict, where: str, rig: CameraRig) -> PointCorrespondence:
    i = _cam_index(obj, where, len(rig))
    world = _reals(obj, "world", 3, where)
    if "pixel" in obj:
        if "bearing" in obj:
            warnings.warn(f"{where}: both pixel and bearing given; using pixel", stacklevel=3)
        uv = _reals(obj, "pixel", 2, where)
        return PointCorrespondence(i, world, rig[i].pixel_to_bearing(uv), uv)
    if "bearing" not in obj:
        raise SchemaError(f"{where}: needs 'bearing' or 'pixel'")
    d = _reals(obj, "bearing", 3, where)
    if np.linalg.norm(d) == 0.0:
        raise SchemaError(f"{where}.bearing: zero vector")
    return PointCorrespondence(i, world, d)


def _line(obj: dict, where: str, rig: CameraRig) -> LineCorrespondence:
    i = _cam_index(obj, where, len(rig))
    d = _reals(obj, "world_direction", 3, where)
    m = _reals(obj, "world_moment", 3, where)
    try:
        try:
            L = PluckerLine(d, m)  # keeps already-unit directions bit-exact
        except DegenerateInput:
            L = PluckerLine.normalized(d, m)
    except DegenerateInput as exc:
        raise SchemaError(f"{where}: {exc}") from None
    if "pixel_endpoints" in obj:
        if "plane_normal" in obj:
            warnings.warn(f"{where}: both pixel_endpoints and plane_normal given; using pixels", stacklevel=3)
        e = _reals(obj, "pixel_endpoints", 4, where)
        cam = rig[i]
        try:
            plane = interpretation_plane_from_bearings(cam.pixel_to_bearing(e[:2]), cam.pixel_to_bearing(e[2:]))
        except DegenerateInput as exc:
            raise SchemaError(f"{where}.pixel_endpoints: {exc}") from None
        return LineCorrespondence(i, L, plane, e)
    if "plane_normal" not in obj:
        raise SchemaError(f"{where}: needs 'plane_normal' or 'pixel_endpoints'")
    n = _reals(obj, "plane_normal", 3, where)
    norm = np.linalg.norm(n)
    if norm == 0.0:
        raise SchemaError(f"{where}.plane_normal: zero vector")
    return LineCorrespondence(i, L, InterpretationPlane(n / norm, 0.0))


def instance_from_dict(data: dict) -> Instance:
    if not isinstance(data, dict):
        raise SchemaError("instance must be a JSON object")
    cams = data.get("rig")
    if not isinstance(cams, list) or not cams:
        raise SchemaError("rig: expected a non-empty list of cameras")
    rig = CameraRig(tuple(_camera(c, f"rig[{k}]") for k, c in enumerate(cams)))
    pts = data.get("points", [])
    lns = data.get("lines", [])
    if not isinstance(pts, list) or not isinstance(lns, list):
        raise SchemaError("points and lines must be lists")
    points = tuple(_point(p, f"points[{k}]", rig) for k, p in enumerate(pts))
    lines = tuple(_line(l, f"lines[{k}]", rig) for k, l in enumerate(lns))
    gt = None
    if data.get("ground_truth") is not None:
        gt = _transform(data["ground_truth"], "ground_truth", ("camera", "world"))
    seed = data.get("seed")
    if seed is not None and (not isinstance(seed, int) or isinstance(seed, bool)):
        raise SchemaError("seed: expected an integer")
    noise = data.get("noise_px")
    if noise is not None:
        noise = _real(data, "noise_px", "instance")
    return Instance(rig, points, lines, gt, seed, noise)


def load_instance(path) -> Instance:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise SchemaError(f"{path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return instance_from_dict(data)


# --------------------------------------------------------------------------
# writing


def _list(a) -> list:
    return [float(x) for x in np.asarray(a, dtype=float).reshape(-1)]


def instance_to_dict(inst: Instance) -> dict:
    cams = []
    for c in inst.rig.cameras:
        K = c.intrinsic
        cams.append(
            {
                "rotation": _list(c.extrinsic.rotation),
                "translation": _list(c.extrinsic.translation),
                "fx": float(K[0, 0]),
                "fy": float(K[1, 1]),
                "cx": float(K[0, 2]),
                "cy": float(K[1, 2]),
                "width": int(c.width),
                "height": int(c.height),
            }
        )
    pts = []
    for p in inst.points:
        d = {"cam": int(p.camera_index), "world": _list(p.world_point)}
        if p.pixel is not None:
            d["pixel"] = _list(p.pixel)
        else:
            d["bearing"] = _list(p.bearing)
        pts.append(d)
    lns = []
    for l in inst.lines:
        d = {
            "cam": int(l.camera_index),
            "world_direction": _list(l.world_line.direction),
            "world_moment": _list(l.world_line.moment),
        }
        if l.pixel_endpoints is not None:
            d["pixel_endpoints"] = _list(l.pixel_endpoints)
        else:
            d["plane_normal"] = _list(l.plane.normal)
        lns.append(d)
    out = {"rig": cams, "points": pts, "lines": lns}
    if inst.ground_truth is not None:
        out["ground_truth"] = {
            "rotation": _list(inst.ground_truth.rotation),
            "translation": _list(inst.ground_truth.translation),
        }
    if inst.seed is not None:
        out["seed"] = int(inst.seed)
    if inst.noise_px is not None:
        out["noise_px"] = float(inst.noise_px)
    return out


def dumps_instance(inst: Instance) -> str:
    return json.dumps(instance_to_dict(inst), indent=2) + "\n"


def save_instance(inst: Instance, path) -> None:
    Path(path).write_text(dumps_instance(inst))


def instance_from_scene(scene) -> Instance:
    return Instance(
        rig=scene.rig,
        points=tuple(scene.points),
        lines=tuple(scene.lines),
        ground_truth=scene.ground_truth_pose,
        seed=int(scene.rng_seed),
        noise_px=float(scene.noise_pixels),
    )


# --------------------------------------------------------------------------
# reports


@dataclass(frozen=True)
class ReportRow:
    solver: str
    noise_px: float
    trial: int
    n_solutions: int
    n_solutions_cheiral: int
    rot_err_deg: float
    trans_err: float
    solve_time_us: float
    status: str

    def as_csv(self) -> list:
        return [
            self.solver,
            repr(float(self.noise_px)),
            str(self.trial),
            str(self.n_solutions),
            str(self.n_solutions_cheiral),
            repr(float(self.rot_err_deg)),
            repr(float(self.trans_err)),
            f"{self.solve_time_us:.1f}",
            self.status,
        ]


def write_report(rows: Iterable[ReportRow], fh: IO[str]) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(REPORT_HEADER)
    for r in rows:
        w.writerow(r.as_csv())


def read_report(fh: IO[str]) -> List[ReportRow]:
    r = csv.reader(fh)
    header = next(r, None)
    if tuple(header or ()) != REPORT_HEADER:
        raise SchemaError(f"report header must be {','.join(REPORT_HEADER)}")
    out = []
    for k, row in enumerate(r, start=2):
        if len(row) != len(REPORT_HEADER):
            raise SchemaError(f"report line {k}: expected {len(REPORT_HEADER)} columns")
        try:
            out.append(
                ReportRow(
                    row[0], float(row[1]), int(row[2]), int(row[3]), int(row[4]),
                    float(row[5]), float(row[6]), float(row[7]), row[8],
                )
            )
        except ValueError as exc:
            raise SchemaError(f"report line {k}: {exc}") from None
    return out

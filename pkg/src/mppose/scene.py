"""Synthetic multi-camera scenes and the pose / reprojection error metrics."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Tuple

import numpy as np

from .errors import GenerationError, InvalidLine, InvalidRotation
from .geometry import (
    cross,
    Camera,
    CameraRig,
    InterpretationPlane,
    LineCorrespondence,
    PluckerLine,
    PointCorrespondence,
    RigidTransform,
    compose,
    interpretation_plane_from_bearings,
    invert,
    plucker_from_points,
    random_rotation,
    transform_line,
    transform_point,
)
from .solution import P1L2Problem, P2L1Problem

MAX_ATTEMPTS = 100


@dataclass(frozen=True)
class SceneConfig:
    n_cameras: int = 3
    n_points: int = 2
    n_lines: int = 2
    noise_px: float = 0.0
    depth_range: Tuple[float, float] = (2.0, 10.0)
    seed: int = 0
    central: bool = False  # every camera shares one extrinsic
    focal: float = 800.0
    width: int = 1280
    height: int = 1024
    rig_radius: float = 1.0
    world_extent: float = 5.0  # |T_GT translation| components drawn in [-extent, extent]
    min_segment_px: float = 50.0


@dataclass(frozen=True)
class SyntheticScene:
    ground_truth_pose: RigidTransform  # T_GT = T_CW
    rig: CameraRig
    points: Tuple[PointCorrespondence, ...]
    point_depths: Tuple[float, ...]
    lines: Tuple[LineCorrespondence, ...]
    line_segments: Tuple[Tuple[np.ndarray, np.ndarray], ...]  # world endpoints
    noise_pixels: float
    rng_seed: int
    config: SceneConfig = field(default_factory=SceneConfig)

    def p2l1_problem(self, line=0, point2=0, point3=1) -> P2L1Problem:
        return P2L1Problem(self.lines[line], self.points[point2], self.points[point3], self.rig)

    def p1l2_problem(self, line1=0, point2=0, line3=1) -> P1L2Problem:
        return P1L2Problem(self.lines[line1], self.points[point2], self.lines[line3], self.rig)

    @property
    def scale(self) -> float:
        """RMS distance of the observed world geometry from the rig origin."""
        c = self.ground_truth_pose.translation
        pts = [p.world_point for p in self.points] + [0.5 * (a + b) for a, b in self.line_segments]
        if not pts:
            return 1.0
        return float(np.sqrt(np.mean([np.sum((p - c) ** 2) for p in pts])))


def point_camera(k: int, n_cameras: int) -> int:
    return (k + 1) % n_cameras


def line_camera(k: int, n_cameras: int) -> int:
    return (2 * k) % n_cameras


def _intrinsic(cfg: SceneConfig) -> np.ndarray:
    return np.array(
        [[cfg.focal, 0.0, cfg.width / 2.0], [0.0, cfg.focal, cfg.height / 2.0], [0.0, 0.0, 1.0]]
    )


def _make_rig(cfg: SceneConfig, rng: np.random.Generator) -> CameraRig:
    K = _intrinsic(cfg)

    def one():
        v = rng.normal(size=3)
        c = v / np.linalg.norm(v) * cfg.rig_radius * rng.uniform() ** (1.0 / 3.0)
        return RigidTransform(random_rotation(rng), c, "camera_i", "camera")

    if cfg.central:
        ext = one()
        exts = [ext] * cfg.n_cameras
    else:
        exts = [one() for _ in range(cfg.n_cameras)]
    return CameraRig(tuple(Camera(e, K, cfg.width, cfg.height) for e in exts))


def _sample_pixel(cfg: SceneConfig, rng) -> np.ndarray:
    return np.array([rng.uniform(0, cfg.width), rng.uniform(0, cfg.height)])


def _backproject(cam: Camera, uv, z) -> np.ndarray:
    """Camera-frame point with optical-axis depth ``z`` seen at pixel ``uv``."""
    K = cam.intrinsic
    ray = np.linalg.solve(K, np.array([uv[0], uv[1], 1.0]))
    return ray * z


def _observe(cam: Camera, uv, noise, rng) -> Tuple[np.ndarray, np.ndarray]:
    uv = np.asarray(uv, dtype=float)
    if noise > 0:
        uv = uv + rng.normal(scale=noise, size=2)
    return uv, cam.pixel_to_bearing(uv)


def generate_scene(config: SceneConfig = SceneConfig()) -> SyntheticScene:
    """Random ground-truth pose, random rig and features projected into each camera.

    Points go to camera ``(k + 1) % n`` and lines to camera ``2k % n``, so
    with three cameras the first line, first point and second point/line land
    in cameras 0, 1 and 2.
    """
    cfg = config
    if cfg.n_cameras < 1:
        raise ValueError("n_cameras must be >= 1")
    if cfg.noise_px < 0:
        raise ValueError("noise_px must be >= 0")
    rng = np.random.default_rng(cfg.seed)
    rig = _make_rig(cfg, rng)
    T_GT = RigidTransform(
        random_rotation(rng), rng.uniform(-cfg.world_extent, cfg.world_extent, size=3), "camera", "world"
    )
    zmin, zmax = cfg.depth_range

    def to_world(i, x_cam):
        ext = rig[i].extrinsic
        return transform_point(T_GT, ext.rotation @ x_cam + ext.translation)

    points, depths = [], []
    for k in range(cfg.n_points):
        i = point_camera(k, cfg.n_cameras)
        cam = rig[i]
        uv = _sample_pixel(cfg, rng)
        x = _backproject(cam, uv, rng.uniform(zmin, zmax))
        uv_obs, d = _observe(cam, uv, cfg.noise_px, rng)
        points.append(PointCorrespondence(i, to_world(i, x), d, uv_obs if cfg.noise_px > 0 else uv))
        depths.append(float(np.linalg.norm(x)))

    lines, segments = [], []
    for k in range(cfg.n_lines):
        i = line_camera(k, cfg.n_cameras)
        cam = rig[i]
        for _ in range(MAX_ATTEMPTS):
            ua, ub = _sample_pixel(cfg, rng), _sample_pixel(cfg, rng)
            if np.linalg.norm(ua - ub) >= cfg.min_segment_px:
                break
        else:
            raise GenerationError("could not place a line segment in the image")
        xa = _backproject(cam, ua, rng.uniform(zmin, zmax))
        xb = _backproject(cam, ub, rng.uniform(zmin, zmax))
        wa, wb = to_world(i, xa), to_world(i, xb)
        oa, da = _observe(cam, ua, cfg.noise_px, rng)
        ob, db = _observe(cam, ub, cfg.noise_px, rng)
        plane = interpretation_plane_from_bearings(da, db)
        lines.append(LineCorrespondence(i, plucker_from_points(wa, wb), plane, np.concatenate([oa, ob])))
        segments.append((wa, wb))

    return SyntheticScene(
        ground_truth_pose=T_GT,
        rig=rig,
        points=tuple(points),
        point_depths=tuple(depths),
        lines=tuple(lines),
        line_segments=tuple(segments),
        noise_pixels=float(cfg.noise_px),
        rng_seed=int(cfg.seed),
        config=cfg,
    )


def trial_seed(seed: int, trial: int) -> int:
    """Independent 64-bit seed for trial ``trial`` of a batch seeded by ``seed``."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(trial),))
    return int(ss.generate_state(1, np.uint64)[0])


def inject_outliers(scene: SyntheticScene, fraction: float, rng: np.random.Generator) -> Tuple[SyntheticScene, np.ndarray]:
    """Replace the world geometry of a random ``fraction`` of all features.

    Returns the corrupted scene and a boolean mask over ``points + lines``
    marking the outliers. Replacement geometry is drawn around the rig at the
    scene's depth range so it stays plausible.
    """
    n_p, n_l = len(scene.points), len(scene.lines)
    n = n_p + n_l
    k = int(round(fraction * n))
    mask = np.zeros(n, dtype=bool)
    mask[rng.choice(n, size=k, replace=False)] = True
    T = scene.ground_truth_pose
    zmax = scene.config.depth_range[1]

    def random_world_point():
        v = rng.normal(size=3)
        return T.translation + v / np.linalg.norm(v) * rng.uniform(*scene.config.depth_range)

    pts = list(scene.points)
    for j in range(n_p):
        if mask[j]:
            pts[j] = replace(pts[j], world_point=random_world_point())
    lns = list(scene.lines)
    segs = list(scene.line_segments)
    for j in range(n_l):
        if mask[n_p + j]:
            a = random_world_point()
            b = a + rng.normal(size=3) * zmax / 4
            lns[j] = replace(lns[j], world_line=plucker_from_points(a, b))
            segs[j] = (a, b)
    return replace(scene, points=tuple(pts), lines=tuple(lns), line_segments=tuple(segs)), mask


# --------------------------------------------------------------------------
# metrics


def rotation_error_deg(R_est, R_gt) -> float:
    """Angle of ``R_est R_gt^T`` in degrees.

    Evaluated as ``atan2(|sin|, cos)`` from the skew and trace parts of the
    relative rotation, which equals ``acos((trace - 1) / 2)`` but keeps full
    precision for tiny angles.
    """
    R_est = np.asarray(R_est, dtype=float)
    R_gt = np.asarray(R_gt, dtype=float)
    for R in (R_est, R_gt):
        if R.shape != (3, 3) or np.linalg.norm(R.T @ R - np.eye(3)) > 1e-6 or np.linalg.det(R) < 0:
            raise InvalidRotation("rotation_error_deg needs SO(3) inputs")
    dR = R_est @ R_gt.T
    cos = max(-1.0, min(1.0, (np.trace(dR) - 1.0) / 2.0))
    w = np.array([dR[2, 1] - dR[1, 2], dR[0, 2] - dR[2, 0], dR[1, 0] - dR[0, 1]])
    sin = np.linalg.norm(w) / 2.0
    return math.degrees(math.atan2(sin, cos))


def translation_error(t_est, t_gt) -> float:
    return float(np.linalg.norm(np.asarray(t_est, dtype=float) - np.asarray(t_gt, dtype=float)))


def point_line_distance(u, l) -> float:
    a, b, c = l
    return abs(a * u[0] + b * u[1] + c) / math.hypot(a, b)


def line_reprojection_distance(u1, u2, l) -> float:
    """Endpoint distance to an image line, inflated by the angle between the lines.

    ``d_L^2 = (d(u1, l)^2 + d(u2, l)^2) * exp(2 angle)`` where ``angle`` is
    the acute angle between segment ``u1 u2`` and line ``l = (a, b, c)``.
    """
    l = np.asarray(l, dtype=float)
    if not np.all(np.isfinite(l)) or math.hypot(l[0], l[1]) <= 1e-300:
        raise InvalidLine("image line has no direction")
    u1 = np.asarray(u1, dtype=float)
    u2 = np.asarray(u2, dtype=float)
    seg = u2 - u1
    if np.linalg.norm(seg) == 0.0:
        raise InvalidLine("segment endpoints coincide")
    ldir = np.array([l[1], -l[0]])
    cross = abs(seg[0] * ldir[1] - seg[1] * ldir[0])
    dot = abs(seg @ ldir)
    angle = math.atan2(cross, dot)
    d2 = point_line_distance(u1, l) ** 2 + point_line_distance(u2, l) ** 2
    return math.sqrt(d2 * math.exp(2.0 * angle))


def project_point(T_CW: RigidTransform, rig: CameraRig, i: int, p) -> Optional[np.ndarray]:
    """Pixel of world point ``p`` in camera ``i``; ``None`` behind the camera."""
    ext = rig[i].extrinsic
    x_rig = T_CW.rotation.T @ (np.asarray(p, dtype=float) - T_CW.translation)
    x = ext.rotation.T @ (x_rig - ext.translation)
    if x[2] <= 0:
        return None
    h = rig[i].intrinsic @ x
    return h[:2] / h[2]


def project_line(T_CW: RigidTransform, rig: CameraRig, i: int, L: PluckerLine) -> np.ndarray:
    """Homogeneous image line of world line ``L`` in camera ``i``."""
    T_world_to_cam = invert(compose(T_CW, rig[i].extrinsic))
    Lc = transform_line(T_world_to_cam, L)
    # the moment is the normal of the plane through the center and the line
    return np.linalg.solve(rig[i].intrinsic.T, Lc.moment)


def observed_pixel(rig: CameraRig, obs: PointCorrespondence) -> np.ndarray:
    if obs.pixel is not None:
        return obs.pixel
    return rig[obs.camera_index].bearing_to_pixel(obs.bearing)


def point_reprojection_error(T_CW, rig, obs: PointCorrespondence) -> float:
    uv = project_point(T_CW, rig, obs.camera_index, obs.world_point)
    if uv is None:
        return math.inf
    return float(np.linalg.norm(uv - observed_pixel(rig, obs)))

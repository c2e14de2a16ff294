"""Hybrid RANSAC over mixed point and line correspondences.

Hypotheses come from the two minimal solvers; each is scored by counting
points whose reprojection lies within ``point_threshold_px`` of the observed
pixel and lines whose endpoint distance ``d_L`` (see
:func:`mppose.scene.line_reprojection_distance`) is within ``line_threshold``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import DegenerateInput, InsufficientData, MPPoseError
from .geometry import CameraRig, LineCorrespondence, PointCorrespondence, RigidTransform
from .p1l2 import solve_p1l2
from .p2l1 import solve_p2l1
from .scene import observed_pixel
from .solution import P1L2Problem, P2L1Problem, cheirality_filter

SUCCESS = "success"
NO_CONSENSUS = "no_consensus"
MODES = ("p2l1", "p1l2", "auto")


class NoConsensus(MPPoseError):
    """RANSAC never produced a pose that could be scored."""


@dataclass(frozen=True)
class RansacConfig:
    point_threshold_px: float = 2.0
    line_threshold: float = 2.0
    required_inlier_fraction: float = 0.4
    max_iterations: int = 1000
    sampling_mode: str = "auto"
    rng_seed: int = 0
    keep_log: bool = False

    def __post_init__(self):
        if not (self.point_threshold_px > 0 and self.line_threshold > 0):
            raise ValueError("thresholds must be positive")
        if not 0.0 < self.required_inlier_fraction <= 1.0:
            raise ValueError("required_inlier_fraction must lie in (0, 1]")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.sampling_mode not in MODES:
            raise ValueError(f"sampling_mode must be one of {MODES}")


@dataclass(frozen=True)
class RansacResult:
    status: str
    best_pose: Optional[RigidTransform]
    point_inliers: Tuple[int, ...]
    line_inliers: Tuple[int, ...]
    iterations_used: int
    achieved_inlier_fraction: float
    log: Tuple[dict, ...] = field(default=())

    @property
    def success(self) -> bool:
        return self.status == SUCCESS

    def to_dict(self) -> dict:
        pose = None
        if self.best_pose is not None:
            pose = {
                "rotation": self.best_pose.rotation.reshape(-1).tolist(),
                "translation": self.best_pose.translation.tolist(),
            }
        return {
            "status": self.status,
            "best_pose": pose,
            "point_inliers": list(self.point_inliers),
            "line_inliers": list(self.line_inliers),
            "iterations_used": self.iterations_used,
            "achieved_inlier_fraction": self.achieved_inlier_fraction,
            "log": list(self.log),
        }


def _clip_to_image(l: np.ndarray, width: float, height: float) -> Optional[np.ndarray]:
    """Endpoints where image line ``l`` crosses the image border."""
    a, b, c = l
    hits = []
    if abs(b) > 1e-12:
        for u in (0.0, width):
            v = -(a * u + c) / b
            if 0.0 <= v <= height:
                hits.append((u, v))
    if abs(a) > 1e-12:
        for v in (0.0, height):
            u = -(b * v + c) / a
            if 0.0 <= u <= width:
                hits.append((u, v))
    if len(hits) < 2:
        return None
    hits = np.array(hits)
    d = np.linalg.norm(hits[:, None, :] - hits[None, :, :], axis=2)
    i, j = np.unravel_index(np.argmax(d), d.shape)
    return np.concatenate([hits[i], hits[j]])


def observed_segment(rig: CameraRig, obs: LineCorrespondence) -> Optional[np.ndarray]:
    """Observed endpoints ``(u1, v1, u2, v2)``; planes without pixels are clipped to the image."""
    if obs.pixel_endpoints is not None:
        return obs.pixel_endpoints
    cam = rig[obs.camera_index]
    l = np.linalg.solve(cam.intrinsic.T, obs.plane.normal)
    return _clip_to_image(l, cam.width, cam.height)


class _Scorer:
    """Vectorized inlier counting for one fixed feature set."""

    def __init__(self, points, lines, rig: CameraRig):
        self.rig = rig
        cams = rig.cameras
        self.ext_R = np.stack([c.extrinsic.rotation for c in cams])
        self.ext_t = np.stack([c.extrinsic.translation for c in cams])
        self.K = np.stack([c.intrinsic for c in cams])
        self.K_inv_T = np.stack([np.linalg.inv(c.intrinsic).T for c in cams])

        self.p_cam = np.array([p.camera_index for p in points], dtype=int)
        self.p_world = np.array([p.world_point for p in points]).reshape(-1, 3)
        self.p_pix = np.array([observed_pixel(rig, p) for p in points]).reshape(-1, 2)

        self.l_cam = np.array([l.camera_index for l in lines], dtype=int)
        self.l_dir = np.array([l.world_line.direction for l in lines]).reshape(-1, 3)
        self.l_mom = np.array([l.world_line.moment for l in lines]).reshape(-1, 3)
        segs = [observed_segment(rig, l) for l in lines]
        self.l_valid = np.array([s is not None for s in segs], dtype=bool)
        self.l_seg = np.array([s if s is not None else np.zeros(4) for s in segs]).reshape(-1, 4)

    def point_errors(self, T: RigidTransform) -> np.ndarray:
        if self.p_cam.size == 0:
            return np.empty(0)
        x_rig = (self.p_world - T.translation) @ T.rotation
        x_cam = np.einsum("nji,nj->ni", self.ext_R[self.p_cam], x_rig - self.ext_t[self.p_cam])
        h = np.einsum("nij,nj->ni", self.K[self.p_cam], x_cam)
        with np.errstate(divide="ignore", invalid="ignore"):
            uv = h[:, :2] / h[:, 2:3]
            err = np.linalg.norm(uv - self.p_pix, axis=1)
        err[~(x_cam[:, 2] > 0)] = np.inf
        return np.where(np.isfinite(err), err, np.inf)

    def line_errors(self, T: RigidTransform) -> np.ndarray:
        if self.l_cam.size == 0:
            return np.empty(0)
        # world -> camera i: x_cam = Q x + s
        Rt = T.rotation.T
        Re_T = np.transpose(self.ext_R[self.l_cam], (0, 2, 1))
        Q = Re_T @ Rt
        s = -np.einsum("nij,j->ni", Q, T.translation) - np.einsum("nij,nj->ni", Re_T, self.ext_t[self.l_cam])
        d = np.einsum("nij,nj->ni", Q, self.l_dir)
        m = np.einsum("nij,nj->ni", Q, self.l_mom) + np.cross(s, d)
        l = np.einsum("nij,nj->ni", self.K_inv_T[self.l_cam], m)
        u1, u2 = self.l_seg[:, :2], self.l_seg[:, 2:]
        norm = np.hypot(l[:, 0], l[:, 1])
        with np.errstate(divide="ignore", invalid="ignore"):
            d1 = np.abs(l[:, 0] * u1[:, 0] + l[:, 1] * u1[:, 1] + l[:, 2]) / norm
            d2 = np.abs(l[:, 0] * u2[:, 0] + l[:, 1] * u2[:, 1] + l[:, 2]) / norm
            seg = u2 - u1
            cr = np.abs(seg[:, 0] * -l[:, 0] - seg[:, 1] * l[:, 1])
            dt = np.abs(seg[:, 0] * l[:, 1] - seg[:, 1] * l[:, 0])
            angle = np.arctan2(cr, dt)
            err = np.sqrt((d1 ** 2 + d2 ** 2) * np.exp(2.0 * angle))
        bad = ~self.l_valid | ~np.isfinite(err)
        err[bad] = np.inf
        return err

    def inliers(self, T: RigidTransform, cfg: RansacConfig) -> Tuple[np.ndarray, np.ndarray]:
        return (
            np.flatnonzero(self.point_errors(T) <= cfg.point_threshold_px),
            np.flatnonzero(self.line_errors(T) <= cfg.line_threshold),
        )


def _resolve_mode(mode: str, n_points: int, n_lines: int) -> str:
    can_p2l1 = n_points >= 2 and n_lines >= 1
    can_p1l2 = n_points >= 1 and n_lines >= 2
    if mode == "p2l1" and not can_p2l1:
        raise InsufficientData("p2l1 sampling needs at least 2 points and 1 line")
    if mode == "p1l2" and not can_p1l2:
        raise InsufficientData("p1l2 sampling needs at least 1 point and 2 lines")
    if mode == "auto":
        if can_p2l1:
            return "p2l1"
        if can_p1l2:
            return "p1l2"
        raise InsufficientData("need 2 points + 1 line or 1 point + 2 lines")
    return mode


def _hypotheses(mode: str, pi, li, points, lines, rig) -> List[RigidTransform]:
    try:
        if mode == "p2l1":
            sols = solve_p2l1(P2L1Problem(lines[li[0]], points[pi[0]], points[pi[1]], rig))
        else:
            sols = solve_p1l2(P1L2Problem(lines[li[0]], points[pi[0]], lines[li[1]], rig))
    except DegenerateInput:
        return []
    return [s.pose for s in cheirality_filter(sols)]


def ransac_pose(
    points: Sequence[PointCorrespondence],
    lines: Sequence[LineCorrespondence],
    rig: CameraRig,
    config: RansacConfig = RansacConfig(),
) -> RansacResult:
    """Best-consensus pose; stops once ``required_inlier_fraction`` of all features agree.

    Ties keep the earlier hypothesis, so the result depends only on the
    inputs and ``config.rng_seed``.
    """
    points, lines = list(points), list(lines)
    mode = _resolve_mode(config.sampling_mode, len(points), len(lines))
    n_pts_sample, n_lines_sample = (2, 1) if mode == "p2l1" else (1, 2)
    total = len(points) + len(lines)
    need = math.ceil(config.required_inlier_fraction * total - 1e-9)
    rng = np.random.default_rng(config.rng_seed)
    scorer = _Scorer(points, lines, rig)

    best_pose, best_count = None, -1
    best_in = (np.empty(0, dtype=int), np.empty(0, dtype=int))
    log = []
    it = 0
    while it < config.max_iterations:
        it += 1
        pi = rng.choice(len(points), size=n_pts_sample, replace=False)
        li = rng.choice(len(lines), size=n_lines_sample, replace=False)
        hyps = _hypotheses(mode, pi, li, points, lines, rig)
        for T in hyps:
            ip, il = scorer.inliers(T, config)
            count = ip.size + il.size
            if count > best_count:
                best_pose, best_count, best_in = T, count, (ip, il)
        if config.keep_log:
            log.append(
                {
                    "iteration": it,
                    "mode": mode,
                    "points": pi.tolist(),
                    "lines": li.tolist(),
                    "n_hypotheses": len(hyps),
                    "best_count": max(best_count, 0),
                }
            )
        if best_count >= need:
            break

    if best_pose is None:
        raise NoConsensus(f"no scorable hypothesis in {it} iterations")
    fraction = best_count / total
    status = SUCCESS if best_count >= need else NO_CONSENSUS
    return RansacResult(
        status=status,
        best_pose=best_pose,
        point_inliers=tuple(int(i) for i in best_in[0]),
        line_inliers=tuple(int(i) for i in best_in[1]),
        iterations_used=it,
        achieved_inlier_fraction=float(fraction),
        log=tuple(log),
    )

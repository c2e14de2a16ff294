"""Problem and solution containers shared by both minimal solvers."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence, Tuple

import numpy as np

from .geometry import (
    CameraRig,
    LineCorrespondence,
    PointCorrespondence,
    RigidTransform,
    line_residual,
    point_residual,
    transform_line,
    transform_point,
)


@dataclass(frozen=True)
class P2L1Problem:
    """Two points and one line: ``l1 -> Pi1`` (camera 1), ``p2 -> d2``, ``p3 -> d3``."""

    line: LineCorrespondence
    point2: PointCorrespondence
    point3: PointCorrespondence
    rig: CameraRig

    def __post_init__(self):
        _check_cameras(self.rig, (self.line, self.point2, self.point3))

    @property
    def points(self) -> Tuple[PointCorrespondence, ...]:
        return (self.point2, self.point3)

    @property
    def lines(self) -> Tuple[LineCorrespondence, ...]:
        return (self.line,)

    def transformed(self, G: RigidTransform) -> "P2L1Problem":
        return P2L1Problem(_move_line(self.line, G), _move_point(self.point2, G), _move_point(self.point3, G), self.rig)


@dataclass(frozen=True)
class P1L2Problem:
    """One point and two lines: ``l1 -> Pi1``, ``p2 -> d2``, ``l3 -> Pi3``."""

    line1: LineCorrespondence
    point2: PointCorrespondence
    line3: LineCorrespondence
    rig: CameraRig

    def __post_init__(self):
        _check_cameras(self.rig, (self.line1, self.point2, self.line3))

    @property
    def points(self) -> Tuple[PointCorrespondence, ...]:
        return (self.point2,)

    @property
    def lines(self) -> Tuple[LineCorrespondence, ...]:
        return (self.line1, self.line3)

    def transformed(self, G: RigidTransform) -> "P1L2Problem":
        return P1L2Problem(_move_line(self.line1, G), _move_point(self.point2, G), _move_line(self.line3, G), self.rig)


def _check_cameras(rig, features):
    for f in features:
        if not 0 <= f.camera_index < len(rig):
            raise ValueError(f"camera index {f.camera_index} outside rig of {len(rig)}")


def _move_point(obs: PointCorrespondence, G: RigidTransform) -> PointCorrespondence:
    return replace(obs, world_point=transform_point(G, obs.world_point))


def _move_line(obs: LineCorrespondence, G: RigidTransform) -> LineCorrespondence:
    return replace(obs, world_line=transform_line(G, obs.world_line))


@dataclass(frozen=True)
class PoseSolution:
    pose: RigidTransform  # T_CW, rig -> world
    depths: Tuple[float, ...]
    residual_norm: float
    cheirality_ok: bool

    def to_dict(self) -> dict:
        return {
            "rotation": self.pose.rotation.reshape(-1).tolist(),
            "translation": self.pose.translation.tolist(),
            "depths": [float(d) for d in self.depths],
            "residual_norm": float(self.residual_norm),
            "cheirality_ok": bool(self.cheirality_ok),
        }


def residual_norm(pose: RigidTransform, problem, depths: Sequence[float]) -> float:
    total = 0.0
    for obs, d in zip(problem.points, depths):
        total += float(np.sum(point_residual(pose, problem.rig, obs, d) ** 2))
    for obs in problem.lines:
        total += float(np.sum(line_residual(pose, problem.rig, obs) ** 2))
    return float(np.sqrt(total))


def make_solution(pose: RigidTransform, problem, depths: Sequence[float]) -> PoseSolution:
    depths = tuple(float(d) for d in depths)
    return PoseSolution(
        pose=pose,
        depths=depths,
        residual_norm=residual_norm(pose, problem, depths),
        cheirality_ok=all(d > 0.0 for d in depths),
    )


def cheirality_filter(solutions: Sequence[PoseSolution], problem=None, flag_only: bool = False):
    """Keep solutions whose point depths are all positive.

    With ``flag_only`` every solution is returned and only the
    ``cheirality_ok`` flag is recomputed.
    """
    out = []
    for s in solutions:
        ok = all(d > 0.0 for d in s.depths)
        if flag_only:
            out.append(replace(s, cheirality_ok=ok))
        elif ok:
            out.append(s)
    return out

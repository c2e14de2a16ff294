"""Predefined world/camera frames that both minimal solvers work in.

Canonical world: the first line is the y-axis and the first point sits at
``(0, 0, z)``. Canonical camera: the first line's camera is at the origin
and its interpretation plane is ``z = 0``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateConfiguration, DegenerateInput
from .geometry import (
    cross,
    CameraRig,
    InterpretationPlane,
    LineCorrespondence,
    PluckerLine,
    PointCorrespondence,
    RigidTransform,
    compose,
    invert,
    transform_line,
    transform_point,
)

WORLD = "world"
CAMERA = "camera"
CANON_WORLD = "world~"
CANON_CAMERA = "camera~"

POINT_ON_LINE_TOL = 1e-9

_EX = np.array([1.0, 0.0, 0.0])
_EY = np.array([0.0, 1.0, 0.0])


def world_canonical_transform(l1: PluckerLine, p2) -> RigidTransform:
    """Transform sending ``l1`` to the y-axis and ``p2`` onto the z-axis."""
    p2 = np.asarray(p2, dtype=float)
    q1 = cross(l1.direction, l1.moment)
    r1 = cross(l1.direction, p2 - q1)
    n = np.linalg.norm(r1)
    if n <= POINT_ON_LINE_TOL:
        raise DegenerateConfiguration("first point lies on the first line")
    r1 = r1 / n
    r2 = l1.direction / np.linalg.norm(l1.direction)
    r3 = cross(r1, r2)
    R = np.vstack([r1, r2, r3])
    Rq = R @ q1
    lam = (R @ p2)[1] - Rq[1]
    t = -(Rq + lam * _EY)
    return RigidTransform(R, t, WORLD, CANON_WORLD)


def camera_canonical_transform(plane: InterpretationPlane, c1) -> RigidTransform:
    """Transform sending ``c1`` to the origin and the plane normal to ``e_z``.

    ``plane`` is the first interpretation plane expressed in the rig frame.
    """
    normal = np.asarray(plane.normal, dtype=float)
    n = np.linalg.norm(normal)
    if n <= 1e-12:
        raise DegenerateInput("interpretation plane normal is zero")
    r3 = normal / n
    ex = cross(_EX, r3)
    ey = cross(_EY, r3)
    # on a tie keep the candidate that points along e_x (e_y x e_z = e_x),
    # so an already-canonical plane gives the identity
    e = ex if np.linalg.norm(ex) > np.linalg.norm(ey) + 1e-12 else ey
    r1 = e / np.linalg.norm(e)
    r2 = cross(r3, r1)
    R = np.vstack([r1, r2, r3])
    return RigidTransform(R, -R @ np.asarray(c1, dtype=float), CAMERA, CANON_CAMERA)


def decanonicalize(T_hat: RigidTransform, T1: RigidTransform, T2: RigidTransform) -> RigidTransform:
    """Undo the predefined frames: ``T_CW = T1^-1 · T_hat · T2``."""
    return compose(invert(T1), compose(T_hat, T2))


def canonical_pose(T_CW: RigidTransform, T1: RigidTransform, T2: RigidTransform) -> RigidTransform:
    """Express a rig-to-world pose between the canonical frames (inverse of decanonicalize)."""
    return compose(T1, compose(T_CW, invert(T2)))


@dataclass(frozen=True)
class CanonicalPoint:
    world: np.ndarray  # point in canonical world
    center: np.ndarray  # camera center in canonical camera frame
    bearing: np.ndarray  # unit bearing in canonical camera frame


@dataclass(frozen=True)
class CanonicalLine:
    world: PluckerLine  # line in canonical world
    normal: np.ndarray  # plane normal in canonical camera frame
    offset: float  # plane offset in canonical camera frame


@dataclass(frozen=True)
class CanonicalInstance:
    T1: RigidTransform
    T2: RigidTransform
    points: tuple
    lines: tuple

    def decanonicalize(self, T_hat: RigidTransform) -> RigidTransform:
        return decanonicalize(T_hat, self.T1, self.T2)


def rig_plane(rig: CameraRig, obs: LineCorrespondence) -> tuple:
    """Interpretation plane of ``obs`` in the rig frame as (normal, offset)."""
    ext = rig[obs.camera_index].extrinsic
    n = ext.rotation @ obs.plane.normal
    off = obs.plane.offset - n @ ext.translation
    return n, off


def canonicalize(rig: CameraRig, first_line: LineCorrespondence, first_point: PointCorrespondence,
                 points=(), lines=()) -> CanonicalInstance:
    """Map a minimal problem to the canonical frames.

    ``first_line`` and ``first_point`` fix the frames; the returned instance
    lists ``first_point`` followed by ``points``, and ``first_line`` followed
    by ``lines``, all expressed in the canonical frames.
    """
    T1 = world_canonical_transform(first_line.world_line, first_point.world_point)
    n1, off1 = rig_plane(rig, first_line)
    c1 = rig[first_line.camera_index].center
    T2 = camera_canonical_transform(InterpretationPlane(n1 / np.linalg.norm(n1), 0.0), c1)
    R2, t2 = T2.rotation, T2.translation

    cpoints = []
    for obs in (first_point, *points):
        ext = rig[obs.camera_index].extrinsic
        cpoints.append(
            CanonicalPoint(
                world=transform_point(T1, obs.world_point),
                center=R2 @ ext.translation + t2,
                bearing=R2 @ (ext.rotation @ obs.bearing),
            )
        )
    clines = []
    for obs in (first_line, *lines):
        n, off = rig_plane(rig, obs)
        n2 = R2 @ n
        # plane offset after x' = R2 x + t2
        off2 = off - n2 @ t2
        clines.append(CanonicalLine(world=transform_line(T1, obs.world_line), normal=n2, offset=off2))
    return CanonicalInstance(T1, T2, tuple(cpoints), tuple(clines))

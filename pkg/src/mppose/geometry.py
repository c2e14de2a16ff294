"""Rigid transforms, Plücker lines, interpretation planes and pose residuals.

Conventions
-----------
``T_CW`` maps coordinates in the rig (global camera) frame to the world
frame, so a point seen by camera ``i`` at depth ``delta`` along the unit
bearing ``d`` satisfies ``T_CW (delta * R_i d + c_i) = p``.

Lines carry a unit direction and a moment ``m = x x direction`` for any
point ``x`` on the line.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import DegenerateInput, FrameError, InvalidRotation

_SO3_TOL = 1e-6


def _vec3(x) -> np.ndarray:
    a = np.asarray(x, dtype=float).reshape(3)
    return a


def skew(v) -> np.ndarray:
    x, y, z = v
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def cross(a, b) -> np.ndarray:
    """3-vector cross product (np.cross carries heavy per-call overhead)."""
    return np.array(
        [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
    )


def check_rotation(R: np.ndarray, tol: float = _SO3_TOL) -> None:
    if R.shape != (3, 3) or not np.isfinite(R).all():
        raise InvalidRotation("rotation must be a finite 3x3 matrix")
    E = R.T @ R
    E[0, 0] -= 1.0
    E[1, 1] -= 1.0
    E[2, 2] -= 1.0
    if math.sqrt(float((E * E).sum())) > tol:
        raise InvalidRotation("rotation is not orthonormal")
    if abs(float(cross(R[0], R[1]) @ R[2]) - 1.0) > tol:
        raise InvalidRotation("rotation has det != +1")


@dataclass(frozen=True)
class RigidTransform:
    """Rotation and translation taking ``from_frame`` coordinates to ``to_frame``.

    Frame labels are optional; ``None`` matches anything when composing.
    """

    rotation: np.ndarray
    translation: np.ndarray
    from_frame: Optional[str] = None
    to_frame: Optional[str] = None

    def __post_init__(self):
        R = np.array(self.rotation, dtype=float).reshape(3, 3)
        t = np.array(self.translation, dtype=float).reshape(3)
        check_rotation(R)
        R.flags.writeable = False
        t.flags.writeable = False
        object.__setattr__(self, "rotation", R)
        object.__setattr__(self, "translation", t)

    @classmethod
    def identity(cls, from_frame=None, to_frame=None) -> "RigidTransform":
        return cls(np.eye(3), np.zeros(3), from_frame, to_frame)

    @property
    def matrix(self) -> np.ndarray:
        M = np.eye(4)
        M[:3, :3] = self.rotation
        M[:3, 3] = self.translation
        return M

    @classmethod
    def from_matrix(cls, M, from_frame=None, to_frame=None) -> "RigidTransform":
        M = np.asarray(M, dtype=float)
        return cls(M[:3, :3], M[:3, 3], from_frame, to_frame)

    def inverse(self) -> "RigidTransform":
        return invert(self)

    def __matmul__(self, other: "RigidTransform") -> "RigidTransform":
        return compose(self, other)

    def apply(self, p) -> np.ndarray:
        return transform_point(self, p)


def _frames_match(a: Optional[str], b: Optional[str]) -> bool:
    return a is None or b is None or a == b


def compose(a: RigidTransform, b: RigidTransform) -> RigidTransform:
    """Return ``a ∘ b``: apply ``b`` first, then ``a``."""
    if not _frames_match(a.from_frame, b.to_frame):
        raise FrameError(
            f"cannot compose {a.from_frame}->{a.to_frame} after "
            f"{b.from_frame}->{b.to_frame}"
        )
    R = a.rotation @ b.rotation
    t = a.rotation @ b.translation + a.translation
    return RigidTransform(R, t, b.from_frame, a.to_frame)


def invert(T: RigidTransform) -> RigidTransform:
    Rt = T.rotation.T
    return RigidTransform(Rt, -Rt @ T.translation, T.to_frame, T.from_frame)


def transform_point(T: RigidTransform, p) -> np.ndarray:
    return T.rotation @ _vec3(p) + T.translation


@dataclass(frozen=True)
class PluckerLine:
    direction: np.ndarray
    moment: np.ndarray

    def __post_init__(self):
        d = np.array(self.direction, dtype=float).reshape(3)
        m = np.array(self.moment, dtype=float).reshape(3)
        n = np.linalg.norm(d)
        if not np.isfinite(n) or abs(n - 1.0) > 1e-9:
            raise DegenerateInput("line direction must be a unit vector")
        if abs(d @ m) > 1e-8 * max(1.0, np.linalg.norm(m)):
            raise DegenerateInput("line moment must be orthogonal to its direction")
        d.flags.writeable = False
        m.flags.writeable = False
        object.__setattr__(self, "direction", d)
        object.__setattr__(self, "moment", m)

    @classmethod
    def normalized(cls, direction, moment) -> "PluckerLine":
        """Rescale a homogeneous (direction, moment) pair to unit direction.

        Any component of the moment along the direction is projected out.
        """
        d = _vec3(direction)
        m = _vec3(moment)
        n = np.linalg.norm(d)
        if n < 1e-12:
            raise DegenerateInput("line direction is zero")
        d = d / n
        m = m / n
        m = m - (m @ d) * d
        return cls(d, m)

    def closest_point(self) -> np.ndarray:
        """Point of the line closest to the origin."""
        return cross(self.direction, self.moment)

    def contains(self, q, tol: float = 1e-9) -> bool:
        return bool(np.linalg.norm(cross(_vec3(q), self.direction) - self.moment) <= tol)

    @property
    def matrix(self) -> np.ndarray:
        """4x4 Plücker matrix ``[[hat(m), d], [d^T, 0]]``."""
        L = np.zeros((4, 4))
        L[:3, :3] = skew(self.moment)
        L[:3, 3] = self.direction
        L[3, :3] = self.direction
        return L


def plucker_from_points(q1, q2) -> PluckerLine:
    q1 = _vec3(q1)
    q2 = _vec3(q2)
    diff = q2 - q1
    n = np.linalg.norm(diff)
    if n <= 1e-12:
        raise DegenerateInput("coincident points do not define a line")
    d = diff / n
    return PluckerLine(d, cross(q1, d))


def transform_line(T: RigidTransform, L: PluckerLine) -> PluckerLine:
    d = T.rotation @ L.direction
    m = T.rotation @ L.moment + cross(T.translation, d)
    return PluckerLine(d, m)


@dataclass(frozen=True)
class InterpretationPlane:
    """Plane ``normal · x + offset = 0``."""

    normal: np.ndarray
    offset: float = 0.0

    def __post_init__(self):
        n = np.array(self.normal, dtype=float).reshape(3)
        if abs(np.linalg.norm(n) - 1.0) > 1e-9:
            raise DegenerateInput("plane normal must be a unit vector")
        n.flags.writeable = False
        object.__setattr__(self, "normal", n)
        object.__setattr__(self, "offset", float(self.offset))

    @property
    def homogeneous(self) -> np.ndarray:
        return np.append(self.normal, self.offset)


def interpretation_plane_from_bearings(d1, d2) -> InterpretationPlane:
    n = cross(_vec3(d1), _vec3(d2))
    norm = np.linalg.norm(n)
    if norm <= 1e-10:
        raise DegenerateInput("parallel bearings do not span a plane")
    return InterpretationPlane(n / norm, 0.0)


@dataclass(frozen=True)
class Camera:
    """One perspective camera of a rig: ``extrinsic`` is ``T_{Ci,C}``."""

    extrinsic: RigidTransform
    intrinsic: np.ndarray = field(
        default_factory=lambda: np.array([[800.0, 0, 640.0], [0, 800.0, 512.0], [0, 0, 1.0]])
    )
    width: int = 1280
    height: int = 1024

    def __post_init__(self):
        K = np.array(self.intrinsic, dtype=float).reshape(3, 3)
        K.flags.writeable = False
        object.__setattr__(self, "intrinsic", K)

    @property
    def center(self) -> np.ndarray:
        return self.extrinsic.translation

    def pixel_to_bearing(self, uv) -> np.ndarray:
        K = self.intrinsic
        x = (uv[0] - K[0, 2] - K[0, 1] * (uv[1] - K[1, 2]) / K[1, 1]) / K[0, 0]
        y = (uv[1] - K[1, 2]) / K[1, 1]
        b = np.array([x, y, 1.0])
        return b / np.linalg.norm(b)

    def bearing_to_pixel(self, d) -> np.ndarray:
        h = self.intrinsic @ _vec3(d)
        return h[:2] / h[2]


@dataclass(frozen=True)
class CameraRig:
    cameras: tuple

    def __post_init__(self):
        cams = tuple(self.cameras)
        if len(cams) < 1:
            raise ValueError("a rig needs at least one camera")
        object.__setattr__(self, "cameras", cams)

    def __len__(self):
        return len(self.cameras)

    def __getitem__(self, i) -> Camera:
        return self.cameras[i]

    @classmethod
    def single(cls, extrinsic: Optional[RigidTransform] = None) -> "CameraRig":
        return cls((Camera(extrinsic or RigidTransform.identity()),))


@dataclass(frozen=True)
class PointCorrespondence:
    """World point ``p`` observed by camera ``camera_index`` along ``bearing``.

    ``pixel`` is kept when the observation came from an image measurement.
    """

    camera_index: int
    world_point: np.ndarray
    bearing: np.ndarray
    pixel: Optional[np.ndarray] = None

    def __post_init__(self):
        p = np.array(self.world_point, dtype=float).reshape(3)
        d = np.array(self.bearing, dtype=float).reshape(3)
        n = np.linalg.norm(d)
        if not n > 0:
            raise DegenerateInput("bearing is zero")
        d = d / n
        object.__setattr__(self, "world_point", p)
        object.__setattr__(self, "bearing", d)
        if self.pixel is not None:
            object.__setattr__(self, "pixel", np.array(self.pixel, dtype=float).reshape(2))


@dataclass(frozen=True)
class LineCorrespondence:
    camera_index: int
    world_line: PluckerLine
    plane: InterpretationPlane
    pixel_endpoints: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.pixel_endpoints is not None:
            e = np.array(self.pixel_endpoints, dtype=float).reshape(4)
            object.__setattr__(self, "pixel_endpoints", e)


def point_residual(T_CW: RigidTransform, rig: CameraRig, obs: PointCorrespondence, depth: float) -> np.ndarray:
    """Collinearity residual ``T_CW (depth R_i d + c_i) - p``."""
    ext = rig[obs.camera_index].extrinsic
    x = depth * (ext.rotation @ obs.bearing) + ext.translation
    return transform_point(T_CW, x) - obs.world_point


def line_residual(T_CW: RigidTransform, rig: CameraRig, obs: LineCorrespondence) -> np.ndarray:
    """Coplanarity residual ``L_W T_CW^{-T} T_{Ci,C}^{-T} Pi``."""
    ext = rig[obs.camera_index].extrinsic
    plane_world = np.linalg.solve(T_CW.matrix.T, np.linalg.solve(ext.matrix.T, obs.plane.homogeneous))
    return obs.world_line.matrix @ plane_world


def rig_point_depth(T_CW: RigidTransform, rig: CameraRig, obs: PointCorrespondence) -> float:
    """Signed depth of the world point along the observed bearing under ``T_CW``."""
    ext = rig[obs.camera_index].extrinsic
    x_rig = T_CW.rotation.T @ (obs.world_point - T_CW.translation)
    x_cam = ext.rotation.T @ (x_rig - ext.translation)
    return float(x_cam @ obs.bearing)


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    """Uniformly distributed rotation (Haar measure) via a unit quaternion."""
    q = rng.normal(size=4)
    q /= np.linalg.norm(q)
    w, x, y, z = q
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
            [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
            [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
        ]
    )


def axis_angle_rotation(axis: Sequence[float], angle: float) -> np.ndarray:
    k = _vec3(axis)
    k = k / np.linalg.norm(k)
    K = skew(k)
    return np.eye(3) + np.sin(angle) * K + (1 - np.cos(angle)) * (K @ K)

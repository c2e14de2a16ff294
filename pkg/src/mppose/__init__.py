"""Absolute pose of a multi-camera rig from minimal mixes of points and lines."""

from .errors import (
    DegenerateConfiguration,
    DegenerateInput,
    DegenerateSystem,
    FrameError,
    GenerationError,
    InsufficientData,
    InvalidLine,
    InvalidPolynomial,
    InvalidRotation,
    MPPoseError,
    SchemaError,
    ShapeError,
)
from .geometry import (
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
    line_residual,
    plucker_from_points,
    point_residual,
    transform_line,
    transform_point,
)
from .p1l2 import solve_p1l2
from .p2l1 import solve_p2l1
from .polynomials import Poly1, Poly2, eliminate_to_octic, intersect_quadrics, solve_octic, solve_quartic
from .ransac import NoConsensus, RansacConfig, RansacResult, ransac_pose
from .scene import SceneConfig, SyntheticScene, generate_scene
from .solution import P1L2Problem, P2L1Problem, PoseSolution, cheirality_filter

__version__ = "0.1.0"

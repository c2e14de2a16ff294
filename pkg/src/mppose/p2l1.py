"""Closed-form pose from two point and one line correspondences.

In the canonical frames the rotation is ``R = R_y(theta) R_z(alpha)``, the
first point gives the translation, ``cos(theta)`` follows from the line's
plane, and the second point leaves two conics in the depths
``(delta2, delta3)``. Their intersection is a quartic solved in closed form.
"""

from __future__ import annotations

from typing import List, Tuple

import numpy as np

from .canonical import CANON_CAMERA, CANON_WORLD, CanonicalInstance, canonicalize
from .errors import DegenerateConfiguration
from .geometry import RigidTransform
from .polynomials import Poly2, intersect_quadrics
from .solution import P2L1Problem, PoseSolution, make_solution

TRIG_TOL = 1e-6
MIN_CANONICAL = 1e-10


def rotation_from_angles(ct: float, st: float, ca: float, sa: float) -> np.ndarray:
    Ry = np.array([[ct, 0.0, -st], [0.0, 1.0, 0.0], [st, 0.0, ct]])
    Rz = np.array([[ca, sa, 0.0], [-sa, ca, 0.0], [0.0, 0.0, 1.0]])
    return Ry @ Rz


def quadric_coefficients(p2, p3, c2, c3, d2, d3) -> Tuple[np.ndarray, np.ndarray]:
    """Closed-form coefficients of the two conics in the point depths.

    The first conic is the unit-norm condition on ``theta``, the second the
    one on ``alpha``. Both are returned as ``[x^2, x y, x, y^2, y, 1]`` with
    ``x = delta2`` and ``y = delta3``; inputs are canonical-frame vectors.
    """
    _, _, p23 = p2
    p31, p32, p33 = p3
    c21, c22, c23 = c2
    c31, c32, c33 = c3
    d21, d22, d23 = d2
    d31, d32, d33 = d3
    p23s, p31s, p33s = p23 * p23, p31 * p31, p33 * p33
    A = np.array(
        [
            -d23 ** 2 * (p31s + p33s),
            2 * d23 * d33 * p23 * p33,
            -2 * d23 * (c23 * p31s + c23 * p33s - c33 * p23 * p33),
            -d33 ** 2 * p23s,
            2 * d33 * p23 * (c23 * p33 - c33 * p23),
            -c23 ** 2 * p31s - c23 ** 2 * p33s + 2 * c23 * c33 * p23 * p33 - c33 ** 2 * p23s + p23s * p31s,
        ]
    )
    b_xx = (
        -d21 ** 2 * p23s * p31s - d22 ** 2 * p23s * p31s + d23 ** 2 * p23s * p33s
        - 2 * d23 ** 2 * p23 * p31s * p33 - 2 * d23 ** 2 * p23 * p33 ** 3 + d23 ** 2 * p31s ** 2
        + 2 * d23 ** 2 * p31s * p33s + d23 ** 2 * p33s ** 2
    )
    b_xy = (
        2 * d21 * d31 * p23s * p31s - 2 * d23 * d33 * p23 ** 3 * p33 - 2 * d23 * d33 * p23 * p33 ** 3
        + 2 * d22 * d32 * p23s * p31s + 2 * d23 * d33 * p23s * p31s + 4 * d23 * d33 * p23s * p33s
        - 2 * d23 * d33 * p23 * p31s * p33
    )
    b_x = (
        2 * c23 * d23 * p31s ** 2 + 2 * c23 * d23 * p33s ** 2 - 4 * c23 * d23 * p23 * p33 ** 3
        - 2 * c33 * d23 * p23 * p33 ** 3 - 2 * c33 * d23 * p23 ** 3 * p33 - 2 * c21 * d21 * p23s * p31s
        - 2 * c22 * d22 * p23s * p31s + 2 * c23 * d23 * p23s * p33s + 2 * c31 * d21 * p23s * p31s
        + 2 * c32 * d22 * p23s * p31s + 4 * c23 * d23 * p31s * p33s + 2 * c33 * d23 * p23s * p31s
        + 4 * c33 * d23 * p23s * p33s - 4 * c23 * d23 * p23 * p31s * p33 - 2 * c33 * d23 * p23 * p31s * p33
    )
    b_yy = -p23s * (d31 ** 2 * p31s + d32 ** 2 * p31s - d33 ** 2 * p23s + 2 * d33 ** 2 * p23 * p33 - d33 ** 2 * p33s)
    b_y = (
        2 * c33 * d33 * p23s ** 2 - 2 * c23 * d33 * p23 * p33 ** 3 - 2 * c23 * d33 * p23 ** 3 * p33
        - 4 * c33 * d33 * p23 ** 3 * p33 + 2 * c21 * d31 * p23s * p31s + 2 * c22 * d32 * p23s * p31s
        + 2 * c23 * d33 * p23s * p31s + 4 * c23 * d33 * p23s * p33s - 2 * c31 * d31 * p23s * p31s
        - 2 * c32 * d32 * p23s * p31s + 2 * c33 * d33 * p23s * p33s - 2 * c23 * d33 * p23 * p31s * p33
    )
    b_1 = (
        -c21 ** 2 * p23s * p31s + 2 * c21 * c31 * p23s * p31s - c22 ** 2 * p23s * p31s
        + 2 * c22 * c32 * p23s * p31s + c23 ** 2 * p23s * p33s - 2 * c23 ** 2 * p23 * p31s * p33
        - 2 * c23 ** 2 * p23 * p33 ** 3 + c23 ** 2 * p31s ** 2 + 2 * c23 ** 2 * p31s * p33s
        + c23 ** 2 * p33s ** 2 - 2 * c23 * c33 * p23 ** 3 * p33 + 2 * c23 * c33 * p23s * p31s
        + 4 * c23 * c33 * p23s * p33s - 2 * c23 * c33 * p23 * p31s * p33 - 2 * c23 * c33 * p23 * p33 ** 3
        - c31 ** 2 * p23s * p31s - c32 ** 2 * p23s * p31s + c33 ** 2 * p23s ** 2 - 2 * c33 ** 2 * p23 ** 3 * p33
        + c33 ** 2 * p23s * p33s + p23s * p31s * p32 ** 2
    )
    return A, np.array([b_xx, b_xy, b_x, b_yy, b_y, b_1])


def conic(a) -> Poly2:
    """Poly2 in (delta2, delta3) from ``[x^2, x y, x, y^2, y, 1]`` coefficients."""
    c = np.zeros((3, 3))
    c[2, 0], c[1, 1], c[1, 0], c[0, 2], c[0, 1], c[0, 0] = a
    return Poly2(c)


def quadrics_generic(p2, p3, c2, c3, d2, d3) -> Tuple[Poly2, Poly2]:
    """The same two conics assembled by polynomial arithmetic from the constraints.

    With ``v = delta2 d2 + c2``, ``w = delta3 d3 + c3``, ``u = w - v`` and
    ``q = p3 - p2``: ``cos(theta) = v_z / p2_z`` and the z-row of
    ``R_y^T q = R_z u`` gives ``sin(theta)``; unit norm of both angle pairs
    yields the conics (up to a nonzero factor).
    """
    x, y = Poly2.x(), Poly2.y()
    v = [x * d2[k] + c2[k] for k in range(3)]
    w = [y * d3[k] + c3[k] for k in range(3)]
    u = [w[k] - v[k] for k in range(3)]
    q = np.asarray(p3, dtype=float) - np.asarray(p2, dtype=float)
    p23 = p2[2]
    theta_conic = v[2] * v[2] * q[0] ** 2 + (v[2] * p3[2] - w[2] * p23) * (v[2] * p3[2] - w[2] * p23) - p23 ** 2 * q[0] ** 2
    num_a = v[2] * (q[0] ** 2 + q[2] ** 2) - u[2] * (q[2] * p23)
    alpha_conic = num_a * num_a + (q[1] ** 2 * q[0] ** 2 * p23 ** 2) - (u[0] * u[0] + u[1] * u[1]) * (q[0] ** 2 * p23 ** 2)
    return theta_conic, alpha_conic


def _back_substitute(ci: CanonicalInstance, d2: float, d3: float):
    P2, P3 = ci.points
    v = d2 * P2.bearing + P2.center
    w = d3 * P3.bearing + P3.center
    u = w - v
    q = P3.world - P2.world
    ct = v[2] / P2.world[2]
    st = (ct * q[2] - u[2]) / q[0]
    if abs(ct * ct + st * st - 1.0) > TRIG_TOL:
        return None
    n = np.hypot(ct, st)
    ct, st = ct / n, st / n
    A = ct * q[0] + st * q[2]
    nu = u[0] * u[0] + u[1] * u[1]
    if nu <= 0.0:
        return None
    ca = (u[0] * A + u[1] * q[1]) / nu
    sa = (u[1] * A - u[0] * q[1]) / nu
    if abs(ca * ca + sa * sa - 1.0) > TRIG_TOL:
        return None
    n = np.hypot(ca, sa)
    R = rotation_from_angles(ct, st, ca / n, sa / n)
    t = P2.world - R @ v
    return RigidTransform(R, t, CANON_CAMERA, CANON_WORLD)


def canonical_instance(problem: P2L1Problem) -> CanonicalInstance:
    ci = canonicalize(problem.rig, problem.line, problem.point2, [problem.point3])
    P2, P3 = ci.points
    if abs(P2.world[2]) < MIN_CANONICAL:
        raise DegenerateConfiguration("first point too close to the line")
    if abs(P3.world[0]) < MIN_CANONICAL * max(1.0, np.linalg.norm(P3.world)):
        raise DegenerateConfiguration("second point lies in the plane of the line and the first point")
    return ci


def solve_p2l1(problem: P2L1Problem) -> List[PoseSolution]:
    """All real poses (at most four) consistent with a 2-point/1-line problem.

    Solutions carry cheirality flags and are sorted by residual norm.
    """
    ci = canonical_instance(problem)
    P2, P3 = ci.points
    A, B = quadric_coefficients(P2.world, P3.world, P2.center, P3.center, P2.bearing, P3.bearing)
    pairs = intersect_quadrics(conic(A), conic(B))
    out = []
    for d2, d3 in pairs:
        T_hat = _back_substitute(ci, d2, d3)
        if T_hat is None:
            continue
        out.append(make_solution(ci.decanonicalize(T_hat), problem, (d2, d3)))
    out.sort(key=lambda s: s.residual_norm)
    return out

import numpy as np
import pytest

from mppose.canonical import (
    camera_canonical_transform,
    canonical_pose,
    canonicalize,
    decanonicalize,
    world_canonical_transform,
)
from mppose.errors import DegenerateConfiguration, DegenerateInput
from mppose.geometry import (
    InterpretationPlane,
    PluckerLine,
    RigidTransform,
    axis_angle_rotation,
    plucker_from_points,
    random_rotation,
    transform_line,
    transform_point,
)
from mppose.p2l1 import rotation_from_angles
from mppose.scene import SceneConfig, generate_scene, rotation_error_deg


def test_world_transform_identity_when_already_canonical():
    T = world_canonical_transform(PluckerLine([0, 1, 0], [0, 0, 0]), [0, 0, 3])
    assert np.allclose(T.rotation, np.eye(3)) and np.allclose(T.translation, 0)


def test_world_transform_x_axis_line():
    # hand construction: rows (0,0,1), (1,0,0), (0,1,0); no shift needed
    L = PluckerLine([1, 0, 0], [0, 0, 0])
    T = world_canonical_transform(L, [0, 2, 0])
    assert np.allclose(T.rotation, [[0, 0, 1], [1, 0, 0], [0, 1, 0]])
    assert np.allclose(transform_point(T, [0, 2, 0]), [0, 0, 2])
    L2 = transform_line(T, L)
    assert np.allclose(L2.direction, [0, 1, 0]) and np.allclose(L2.moment, 0)


def test_world_transform_point_on_line():
    L = plucker_from_points([1, 1, 1], [2, 3, 4])
    with pytest.raises(DegenerateConfiguration):
        world_canonical_transform(L, [3, 5, 7])


def test_world_transform_invariants_random(rng):
    for _ in range(1000):
        q1, q2, p = rng.normal(size=(3, 3)) * 4
        L = plucker_from_points(q1, q2)
        T = world_canonical_transform(L, p)
        L2 = transform_line(T, L)
        p2 = transform_point(T, p)
        assert np.allclose(L2.direction, [0, 1, 0], atol=1e-9)
        assert np.allclose(L2.moment, 0, atol=1e-9)
        assert np.allclose(p2[:2], 0, atol=1e-9)
        dist = np.linalg.norm(np.cross(p - q1, L.direction))
        assert abs(abs(p2[2]) - dist) < 1e-9


def test_camera_transform_examples():
    T = camera_canonical_transform(InterpretationPlane([0, 0, 1]), np.zeros(3))
    assert np.allclose(T.rotation, np.eye(3)) and np.allclose(T.translation, 0)
    T = camera_canonical_transform(InterpretationPlane([1, 0, 0]), [2, 0, 0])
    # hand construction: r3 = e_x, r1 = e_y x e_x = -e_z, r2 = r3 x r1
    assert np.allclose(T.rotation, [[0, 0, -1], [0, 1, 0], [1, 0, 0]])
    assert np.allclose(T.translation, [0, 0, -2])
    assert np.allclose(T.rotation @ [1, 0, 0], [0, 0, 1])
    assert np.allclose(transform_point(T, [2, 0, 0]), 0)


def test_camera_transform_zero_normal():
    class Flat:
        normal = np.zeros(3)

    with pytest.raises(DegenerateInput):
        camera_canonical_transform(Flat(), np.zeros(3))


def test_camera_transform_invariants_random(rng):
    for _ in range(1000):
        n = rng.normal(size=3)
        c = rng.normal(size=3)
        T = camera_canonical_transform(InterpretationPlane(n / np.linalg.norm(n)), c)
        assert np.allclose(transform_point(T, c), 0, atol=1e-9)
        assert np.allclose(T.rotation @ (n / np.linalg.norm(n)), [0, 0, 1], atol=1e-9)
        assert abs(np.linalg.det(T.rotation) - 1) < 1e-9


def test_decanonicalize_trivial_cases(rng):
    T_hat = RigidTransform(random_rotation(rng), rng.normal(size=3))
    I = RigidTransform.identity()
    out = decanonicalize(T_hat, I, I)
    assert np.allclose(out.matrix, T_hat.matrix)
    T1 = RigidTransform(random_rotation(rng), rng.normal(size=3))
    T2 = RigidTransform(random_rotation(rng), rng.normal(size=3))
    out = decanonicalize(I, T1, T2)
    assert np.allclose(out.matrix, np.linalg.inv(T1.matrix) @ T2.matrix, atol=1e-12)


def test_round_trip_and_two_angle_form():
    for seed in range(1000):
        s = generate_scene(SceneConfig(seed=seed))
        pb = s.p2l1_problem()
        ci = canonicalize(pb.rig, pb.line, pb.point2, [pb.point3])
        T = s.ground_truth_pose
        T_hat = canonical_pose(T, ci.T1, ci.T2)
        back = ci.decanonicalize(T_hat)
        assert rotation_error_deg(back.rotation, T.rotation) < 1e-8
        assert np.linalg.norm(back.translation - T.translation) < 1e-9
        R = T_hat.rotation
        ct, st, ca, sa = R[2, 2], -R[0, 2], R[1, 1], -R[1, 0]
        assert np.allclose(rotation_from_angles(ct, st, ca, sa), R, atol=1e-9)


def test_canonical_features_satisfy_frame_invariants():
    s = generate_scene(SceneConfig(seed=3))
    pb = s.p1l2_problem()
    ci = canonicalize(pb.rig, pb.line1, pb.point2, lines=[pb.line3])
    L1 = ci.lines[0]
    assert np.allclose(L1.world.direction, [0, 1, 0]) and np.allclose(L1.world.moment, 0, atol=1e-9)
    assert np.allclose(L1.normal, [0, 0, 1]) and abs(L1.offset) < 1e-9
    assert np.allclose(ci.points[0].world[:2], 0, atol=1e-9)


def test_rotation_from_angles_is_rotation():
    R = rotation_from_angles(np.cos(0.3), np.sin(0.3), np.cos(-1.1), np.sin(-1.1))
    assert np.allclose(R, axis_angle_rotation([0, 1, 0], -0.3) @ axis_angle_rotation([0, 0, 1], 1.1))

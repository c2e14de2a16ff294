import numpy as np
import pytest
from hypothesis import HealthCheck, settings, strategies as st

from mppose.geometry import RigidTransform

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

finite = st.floats(min_value=-10.0, max_value=10.0, allow_nan=False, allow_infinity=False)
vec3 = st.tuples(finite, finite, finite).map(np.array)
seeds = st.integers(min_value=0, max_value=2**32 - 1)


def quat_to_matrix(q):
    """Rotation matrix of a unit quaternion (w, x, y, z); test-side oracle."""
    w, x, y, z = q / np.linalg.norm(q)
    return np.array(
        [
            [w * w + x * x - y * y - z * z, 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), w * w - x * x + y * y - z * z, 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), w * w - x * x - y * y + z * z],
        ]
    )


quaternions = st.tuples(finite, finite, finite, finite).map(np.array).filter(lambda q: np.linalg.norm(q) > 1e-3)
rotations = quaternions.map(quat_to_matrix)
transforms = st.builds(lambda R, t: RigidTransform(R, t), rotations, vec3)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)

import numpy as np
import pytest

from posefusion import quat
from posefusion.pose import Pose


def random_unit_quat(rng, positive_scalar=False):
    q = rng.normal(size=4)
    q /= np.linalg.norm(q)
    return quat.canonicalize(q) if positive_scalar else q


def random_pose(rng, scale=1.0):
    return Pose(scale * rng.normal(size=3), random_unit_quat(rng))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))  # for oracles.py

from pointstream.core.geometry import Pose
from pointstream.projection import CameraIntrinsics, SensorModel, camera_pose


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def small_camera():
    """64x48 camera at the origin looking along +x."""
    intr = CameraIntrinsics(fx=40.0, fy=40.0, cx=31.5, cy=23.5, width=64, height=48)
    return SensorModel(intr, camera_pose((0.0, 0.0, 0.0)))


@pytest.fixture
def identity_camera():
    """Camera with identity pose: camera frame == world frame (z forward)."""
    intr = CameraIntrinsics(fx=100.0, fy=100.0, cx=32.0, cy=24.0, width=64, height=48)
    return SensorModel(intr, Pose.identity())

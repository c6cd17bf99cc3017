"""
Shared fixtures
"""

import numpy as np
import pytest

from src.geometry.camera import StereoRig
from src.stereo.images import GrayImage


@pytest.fixture
def rig():
    """640x480 rig with f = 500 px and a 63 mm baseline"""
    return StereoRig.create(f=500.0, cx=320.0, cy=240.0, baseline_m=0.063,
                            width=640, height=480)


@pytest.fixture
def sim_rig():
    """Small rig used by the simulated rover"""
    return StereoRig.create(f=125.0, cx=80.0, cy=60.0, baseline_m=0.063,
                            width=160, height=120)


def shifted_pair(width: int, height: int, shift: int, seed: int = 0):
    """Random texture and a copy moved `shift` columns so left(x) == right(x - shift)"""
    rng = np.random.default_rng(seed)
    base = rng.integers(0, 256, size=(height, width + shift), dtype=np.uint8)
    return GrayImage(base[:, :width]), GrayImage(base[:, shift:shift + width])

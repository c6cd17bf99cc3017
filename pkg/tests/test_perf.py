"""
Timing budgets for one decision period (run with -m perf)
"""

import time

import numpy as np
import pytest

from conftest import shifted_pair
from src.geometry.pose import Pose2D
from src.geometry.reprojection import build_reprojection_matrix
from src.mapping.occupancy import OccupancyGrid, UltrasoundReading, integrate_all
from src.reconstruction.pointcloud import CloudFilterParams, cloud_from_disparity, filter_cloud
from src.stereo.images import DISP_SCALE, INVALID, ColorImage
from src.stereo.matcher import MatcherParams, compute_disparity

pytestmark = pytest.mark.perf


def best_ms(fn, *args, repeat=3):
    timings = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn(*args)
        timings.append((time.perf_counter() - start) * 1000.0)
    return min(timings)


@pytest.mark.parametrize("shift", [5, 12, 40])
def test_shift_fidelity_full_frame(shift):
    """Test a shifted 640x480 pair: exact disparity and under 2 s"""
    left, right = shifted_pair(640, 480, shift, seed=shift)
    p = MatcherParams()
    start = time.perf_counter()
    dm = compute_disparity(left, right, p)
    assert time.perf_counter() - start < 2.0
    x_lo, x_hi = p.support_columns(640)
    interior = dm.data[p.half:480 - p.half, x_lo:x_hi - 1]
    valid = interior[interior != INVALID]
    assert (valid == shift * DISP_SCALE).mean() >= 0.99


@pytest.mark.parametrize("window", [3, 9])
def test_match_within_decision_period(window):
    """Test a 640x480, 65-disparity match on one worker inside 200 ms"""
    left, right = shifted_pair(640, 480, 20)
    p = MatcherParams(window=window, max_disp=64, workers=1)
    assert best_ms(compute_disparity, left, right, p) < 200.0


def test_reconstruction_budget(rig):
    """Test cloud generation plus filtering for one frame inside 80 ms"""
    left, right = shifted_pair(640, 480, 20)
    dm = compute_disparity(left, right, MatcherParams())
    rgb = ColorImage(np.zeros((480, 640, 3), dtype=np.uint8))
    q = build_reprojection_matrix(rig)
    params = CloudFilterParams()

    def reconstruct():
        filter_cloud(cloud_from_disparity(dm, rgb, q), params)

    assert best_ms(reconstruct) < 80.0


def test_mapping_budget():
    """Test one tick of ultrasound integration inside 50 ms"""
    readings = [UltrasoundReading(i, 2.5, Pose2D(0.3, 0.2, 0.4)) for i in range(3)]
    assert best_ms(lambda: integrate_all(OccupancyGrid(), readings)) < 50.0

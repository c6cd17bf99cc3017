"""
Tests for obstacle segmentation, blobs and decisions
"""

import csv
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from src.errors import BandOutsideHoropter, ParamsInvalid
from src.geometry.camera import StereoRig, depth_to_disparity
from src.obstacle.detector import (
    BinaryMask, Blob, Decision, ObstacleParams, decide, detect, dilate3x3, find_blobs,
    segment_near, write_blobs_csv
)
from src.obstacle.overlay import draw_detections
from src.stereo.images import DISP_SCALE, INVALID, DisparityMap, GrayImage


@pytest.fixture
def wide_rig():
    """Rig whose 0.2-0.4 m band fits a 0..160 horopter"""
    return StereoRig.create(f=500.0, cx=160.0, cy=60.0, baseline_m=0.063,
                            width=320, height=120)


def uniform_map(depth: float, width: int = 320, height: int = 120) -> DisparityMap:
    d = depth_to_disparity(500.0, 0.063, depth)
    return DisparityMap.from_pixels(np.full((height, width), d), 0, 160)


def blob(cx: float) -> Blob:
    return Blob(bbox=(int(cx) - 2, 0, int(cx) + 2, 4), centroid=(cx, 2.0), area=25)


def test_dilate_single_pixel():
    """Test that one set pixel grows into a 3x3 block"""
    bits = np.zeros((20, 20), dtype=bool)
    bits[10, 10] = True
    out = dilate3x3(BinaryMask(bits)).bits
    assert out.sum() == 9
    assert out[9:12, 9:12].all()


def test_dilate_empty_and_full():
    """Test the trivial masks"""
    assert dilate3x3(BinaryMask.empty(8, 6)).count() == 0
    assert dilate3x3(BinaryMask(np.ones((6, 8), dtype=bool))).count() == 48


def test_segment_inside_band(wide_rig):
    """Test that a uniform map at 0.3 m is entirely near"""
    assert segment_near(uniform_map(0.3), wide_rig).count() == 320 * 120


def test_segment_outside_band(wide_rig):
    """Test that a uniform map at 1 m is empty"""
    assert segment_near(uniform_map(1.0), wide_rig).count() == 0


def test_segment_band_edge_inclusive(wide_rig):
    """Test that the exact 78.75 px far edge is inside the band"""
    data = np.full((120, 320), INVALID, dtype=np.uint16)
    data[60, 100] = int(78.75 * DISP_SCALE)
    data[60, 200] = int(78.75 * DISP_SCALE) - 1
    mask = segment_near(DisparityMap(data, 0, 160), wide_rig)
    assert mask.bits[60, 100]
    assert not mask.bits[60, 200]


def test_segment_ignores_invalid(wide_rig):
    """Test that INVALID pixels never enter the mask"""
    assert segment_near(DisparityMap.invalid(320, 120, 0, 160), wide_rig).count() == 0


def test_segment_warns_outside_horopter(wide_rig):
    """Test the horopter warning"""
    dm = DisparityMap.invalid(320, 120, 0, 64)
    with pytest.warns(BandOutsideHoropter):
        segment_near(dm, wide_rig)


def test_segment_no_warning_inside_horopter(wide_rig):
    """Test that a fitting band is silent"""
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        segment_near(DisparityMap.invalid(320, 120, 0, 160), wide_rig)


def test_segment_bad_band(wide_rig):
    """Test that an inverted band is rejected"""
    with pytest.raises(ParamsInvalid):
        segment_near(uniform_map(0.3), wide_rig, 0.4, 0.2)


def test_find_blobs_square():
    """Test bbox, centroid and area of one square"""
    bits = np.zeros((64, 64), dtype=bool)
    bits[20:30, 20:30] = True
    blobs = find_blobs(BinaryMask(bits), min_area=1)
    assert len(blobs) == 1
    assert blobs[0].bbox == (20, 20, 29, 29)
    assert blobs[0].centroid == pytest.approx((24.5, 24.5))
    assert blobs[0].area == 100


def test_find_blobs_two_squares_and_speckle():
    """Test separation and the area filter"""
    bits = np.zeros((64, 64), dtype=bool)
    bits[5:15, 5:15] = True
    bits[40:50, 40:50] = True
    bits[30, 2:5] = True
    blobs = find_blobs(BinaryMask(bits), min_area=20)
    assert len(blobs) == 2
    assert all(b.area == 100 for b in blobs)


def test_find_blobs_diagonal_connectivity():
    """Test that diagonal neighbours belong to one blob"""
    bits = np.eye(10, dtype=bool)
    assert len(find_blobs(BinaryMask(bits), min_area=1)) == 1


def test_decide_rules():
    """Test the reactive decision table"""
    assert decide([], 640) is Decision.FORWARD
    assert decide([blob(100)], 640) is Decision.TURN_RIGHT
    assert decide([blob(500)], 640) is Decision.TURN_LEFT
    assert decide([blob(100), blob(500)], 640) is Decision.TURN90
    assert decide([blob(320)], 640) is Decision.TURN_LEFT


def test_decision_strings():
    """Test the printed command words"""
    assert [str(d) for d in Decision] == ["Forward", "TurnLeft", "TurnRight", "Turn90", "Stop"]


def test_detect_left_obstacle(wide_rig):
    """Test a near patch in the left half"""
    pixels = np.full((120, 320), np.nan)
    pixels[30:90, 20:120] = depth_to_disparity(500.0, 0.063, 0.3)
    mask, blobs, decision = detect(DisparityMap.from_pixels(pixels, 0, 160), wide_rig,
                                   ObstacleParams())
    assert len(blobs) == 1
    assert decision is Decision.TURN_RIGHT
    assert mask.count() == 62 * 102


def test_obstacle_params_validation():
    """Test that bad obstacle settings are rejected"""
    with pytest.raises(ParamsInvalid):
        ObstacleParams(z_near=0.5, z_far=0.4)
    with pytest.raises(ParamsInvalid):
        ObstacleParams(turn90_direction="up")


def test_write_blobs_csv(tmp_path):
    """Test the blob table"""
    path = tmp_path / "blobs.csv"
    write_blobs_csv(path, [Blob((1, 2, 3, 4), (2.0, 3.0), 9)])
    rows = list(csv.reader(path.open()))
    assert rows[0] == ["x0", "y0", "x1", "y1", "cx", "cy", "area"]
    assert rows[1] == ["1", "2", "3", "4", "2.00", "3.00", "9"]


def test_draw_detections():
    """Test that the overlay keeps the size and paints the box"""
    image = GrayImage.constant(128, 96, 90)
    out = draw_detections(image, [Blob((40, 50, 60, 70), (50.0, 60.0), 441)], Decision.TURN_RIGHT)
    assert (out.width, out.height) == (128, 96)
    assert tuple(out.data[50, 50]) == (255, 64, 64)
    assert tuple(out.data[90, 100]) == (90, 90, 90)


@st.composite
def blob_boxes(draw):
    x0 = draw(st.integers(0, 300))
    y0 = draw(st.integers(0, 100))
    w = draw(st.integers(1, 20))
    h = draw(st.integers(1, 20))
    return Blob((x0, y0, x0 + w - 1, y0 + h - 1), (x0 + (w - 1) / 2, y0 + (h - 1) / 2), w * h)


@given(st.integers(0, 2**32 - 1), st.floats(0.0, 0.6))
@settings(max_examples=50, deadline=None)
def test_dilation_contains_its_input(seed, density):
    """Test that dilation never clears a set pixel"""
    bits = np.random.default_rng(seed).random((24, 32)) < density
    out = dilate3x3(BinaryMask(bits)).bits
    assert out[bits].all()
    assert out.sum() >= bits.sum()


@given(st.lists(blob_boxes(), max_size=6), st.randoms(use_true_random=False))
@settings(max_examples=100, deadline=None)
def test_decide_ignores_blob_order(found, rnd):
    """Test that the decision depends on the set of blobs only"""
    shuffled = list(found)
    rnd.shuffle(shuffled)
    assert decide(shuffled, 320) is decide(found, 320)

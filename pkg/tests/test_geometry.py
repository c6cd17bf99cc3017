"""
Tests for camera geometry and reprojection
"""

import math

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from src.errors import (
    BehindCamera, DegenerateW, InvariantViolation, NonPositiveDepth, NonPositiveDisparity
)
from src.geometry.camera import (
    CameraIntrinsics, Point3, StereoRig, depth_to_disparity, project_point, project_stereo,
    triangulate_depth
)
from src.geometry.pose import Pose2D, normalize_angle
from src.geometry.reprojection import (
    ReprojectionMatrix, build_reprojection_matrix, reproject_many, reproject_pixel
)


def test_triangulate_depth_values():
    """Test Z = f*T/d on known values"""
    assert triangulate_depth(500, 0.063, 10) == pytest.approx(3.15)
    assert triangulate_depth(500, 0.063, 500 * 0.063 / 1.0) == pytest.approx(1.0)


def test_triangulate_depth_rejects_zero_disparity():
    """Test that zero disparity is refused"""
    with pytest.raises(NonPositiveDisparity):
        triangulate_depth(500, 0.063, 0)


def test_depth_to_disparity_values():
    """Test the obstacle band edges of the default rig"""
    assert depth_to_disparity(500, 0.063, 0.4) == pytest.approx(78.75)
    assert depth_to_disparity(500, 0.063, 0.2) == pytest.approx(157.5)
    with pytest.raises(NonPositiveDepth):
        depth_to_disparity(500, 0.063, 0)


@given(st.floats(min_value=0.05, max_value=50.0))
def test_depth_disparity_round_trip(z):
    """Test that the two conversions are inverse"""
    d = depth_to_disparity(500, 0.063, z)
    assert triangulate_depth(500, 0.063, d) == pytest.approx(z, rel=1e-12)


@given(st.floats(min_value=0.1, max_value=500.0), st.floats(min_value=0.1, max_value=500.0))
def test_depth_decreases_with_disparity(d1, d2):
    """Test that a larger disparity always means a nearer point"""
    near_d, far_d = max(d1, d2), min(d1, d2)
    assume(near_d > far_d * (1 + 1e-9))
    assert triangulate_depth(500, 0.063, near_d) < triangulate_depth(500, 0.063, far_d)


@given(st.floats(min_value=-1.0, max_value=1.0), st.floats(min_value=-0.8, max_value=0.8),
       st.floats(min_value=0.2, max_value=20.0), st.sampled_from([320.0, 310.0]))
def test_project_then_reproject_returns_point(x, y, z, right_cx):
    """Test that projecting and reprojecting a point is the identity"""
    rig = StereoRig.create(right_cx=right_cx)
    left, right = project_stereo(rig, Point3(x, y, z))
    p = reproject_pixel(build_reprojection_matrix(rig), left.x, left.y, left.x - right.x)
    assert (p.x, p.y, p.z) == pytest.approx((x, y, z), rel=1e-9, abs=1e-9)

def test_intrinsics_invariants():
    """Test that bad intrinsics are rejected"""
    with pytest.raises(InvariantViolation):
        CameraIntrinsics(0.0, 320, 240, 640, 480)
    with pytest.raises(InvariantViolation):
        CameraIntrinsics(500.0, 700, 240, 640, 480)
    with pytest.raises(InvariantViolation):
        StereoRig.create(baseline_m=0.0)


def test_project_point(rig):
    """Test projection along the principal axis and the stereo shift"""
    pixel = project_point(rig.left, Point3(0, 0, 1))
    assert (pixel.x, pixel.y) == (320, 240)

    left, right = project_stereo(rig, Point3(0, 0, 1))
    assert right.x == pytest.approx(288.5)
    assert left.x - right.x == pytest.approx(31.5)

    with pytest.raises(BehindCamera):
        project_point(rig.left, Point3(0, 0, -1))


def test_reprojection_matrix_layout(rig):
    """Test the Q entries for an aligned rig"""
    q = build_reprojection_matrix(rig).q
    assert q[3][3] == 0
    assert q[2][3] == 500
    assert q[3][2] == pytest.approx(1 / 0.063)
    assert not q.flags.writeable


def test_reprojection_matrix_principal_offset():
    """Test that a right principal point offset enters the last entry"""
    rig = StereoRig.create(f=500, cx=320, cy=240, right_cx=310, baseline_m=0.05)
    q = build_reprojection_matrix(rig).q
    assert q[3][3] == pytest.approx(-(320 - 310) / 0.05)


def test_reprojection_matrix_shape():
    """Test that only 4x4 matrices are accepted"""
    with pytest.raises(InvariantViolation):
        ReprojectionMatrix(np.eye(3))


def test_reproject_pixel(rig):
    """Test the principal point at one meter"""
    q = build_reprojection_matrix(rig)
    p = reproject_pixel(q, 320, 240, 31.5)
    assert (p.x, p.y) == pytest.approx((0.0, 0.0))
    assert p.z == pytest.approx(1.0)

    with pytest.raises(NonPositiveDisparity):
        reproject_pixel(q, 320, 240, 0)


def test_reproject_degenerate_w():
    """Test that a vanishing W is reported"""
    q = ReprojectionMatrix(np.diag([1.0, 1.0, 1.0, 0.0]))
    with pytest.raises(DegenerateW):
        reproject_pixel(q, 1, 1, 5)


def test_reprojection_agrees_with_triangulation(rig):
    """Test Z from Q against f*T/d over a pixel grid"""
    q = build_reprojection_matrix(rig)
    xs, ys = np.meshgrid(np.arange(0, 640, 37), np.arange(0, 480, 41))
    ds = 1.0 + (xs + ys) % 90
    points = reproject_many(q, xs.ravel(), ys.ravel(), ds.ravel())
    expected = 500 * 0.063 / ds.ravel()
    np.testing.assert_allclose(points[:, 2], expected, rtol=1e-12)


def test_reproject_many_flags_invalid(rig):
    """Test that non-positive disparities come back as NaN rows"""
    q = build_reprojection_matrix(rig)
    points = reproject_many(q, [320, 320], [240, 240], [0.0, 31.5])
    assert np.isnan(points[0]).all()
    np.testing.assert_allclose(points[1], [0.0, 0.0, 1.0], atol=1e-12)


@given(st.floats(min_value=-100.0, max_value=100.0, allow_nan=False))
def test_normalize_angle_range(theta):
    """Test that wrapped angles land in (-pi, pi]"""
    wrapped = normalize_angle(theta)
    assert -math.pi < wrapped <= math.pi
    assert math.cos(wrapped) == pytest.approx(math.cos(theta), abs=1e-9)


def test_pose_parse():
    """Test pose parsing and normalization"""
    pose = Pose2D.parse("1.5,-2,3.5")
    assert (pose.x, pose.y) == (1.5, -2.0)
    assert pose.theta == pytest.approx(3.5 - 2 * math.pi)
    with pytest.raises(ValueError):
        Pose2D.parse("1,2")

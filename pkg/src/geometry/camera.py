"""
Camera Geometry
Pinhole intrinsics, the stereo rig and depth triangulation
"""

from dataclasses import dataclass

import numpy as np

from src.errors import (
    BehindCamera, InvariantViolation, NonPositiveDepth, NonPositiveDisparity
)

DEFAULT_BASELINE_M = 0.063
DEFAULT_FOCAL_PX = 500.0


@dataclass(frozen=True)
class PixelCoord:
    """Continuous pixel position"""
    x: float
    y: float

    def __post_init__(self):
        if not (np.isfinite(self.x) and np.isfinite(self.y)):
            raise InvariantViolation("pixel coordinates must be finite")


@dataclass(frozen=True)
class Point3:
    """3D point in meters"""
    x: float
    y: float
    z: float

    def __post_init__(self):
        if not np.all(np.isfinite([self.x, self.y, self.z])):
            raise InvariantViolation("point components must be finite")

    def as_array(self) -> np.ndarray:
        """Return the point as a float64 vector"""
        return np.array([self.x, self.y, self.z], dtype=np.float64)


@dataclass(frozen=True)
class CameraIntrinsics:
    """Pinhole camera with square pixels"""
    f: float
    cx: float
    cy: float
    width: int
    height: int

    def __post_init__(self):
        if not self.f > 0:
            raise InvariantViolation("f must be positive")
        if not 0 <= self.cx < self.width:
            raise InvariantViolation("cx must lie inside the image width")
        if not 0 <= self.cy < self.height:
            raise InvariantViolation("cy must lie inside the image height")

    @property
    def matrix(self) -> np.ndarray:
        """3x3 calibration matrix K"""
        return np.array([
            [self.f, 0.0, self.cx],
            [0.0, self.f, self.cy],
            [0.0, 0.0, 1.0],
        ])


@dataclass(frozen=True)
class StereoRig:
    """Horizontal stereo pair; the left camera is the reference"""
    left: CameraIntrinsics
    right: CameraIntrinsics
    baseline_m: float = DEFAULT_BASELINE_M

    def __post_init__(self):
        if not self.baseline_m > 0:
            raise InvariantViolation("baseline_m must be positive")
        if self.left.f != self.right.f:
            raise InvariantViolation("left and right focal lengths must be equal")
        if (self.left.width, self.left.height) != (self.right.width, self.right.height):
            raise InvariantViolation("left and right image sizes must be equal")

    @classmethod
    def create(cls, f: float = DEFAULT_FOCAL_PX, cx: float = 320.0, cy: float = 240.0,
               right_cx: float = None, baseline_m: float = DEFAULT_BASELINE_M,
               width: int = 640, height: int = 480) -> "StereoRig":
        """Build a rig from the flat calibration parameters"""
        right_cx = cx if right_cx is None else right_cx
        left = CameraIntrinsics(f, cx, cy, width, height)
        right = CameraIntrinsics(f, right_cx, cy, width, height)
        return cls(left, right, baseline_m)

    @property
    def f(self) -> float:
        return self.left.f

    @property
    def right_cx(self) -> float:
        return self.right.cx

    @property
    def width(self) -> int:
        return self.left.width

    @property
    def height(self) -> int:
        return self.left.height


def triangulate_depth(f: float, baseline_m: float, d: float) -> float:
    """Z = f*T/d"""
    if not d > 0:
        raise NonPositiveDisparity(f"disparity {d} is not positive")
    return f * baseline_m / d


def depth_to_disparity(f: float, baseline_m: float, z: float) -> float:
    """d = f*T/Z, the inverse of triangulate_depth"""
    if not z > 0:
        raise NonPositiveDepth(f"depth {z} is not positive")
    return f * baseline_m / z


def project_point(cam: CameraIntrinsics, p: Point3) -> PixelCoord:
    """Project a camera-frame point through the pinhole model"""
    if not p.z > 0:
        raise BehindCamera(f"point depth {p.z} is not in front of the camera")
    return PixelCoord(cam.cx + cam.f * p.x / p.z, cam.cy + cam.f * p.y / p.z)


def project_stereo(rig: StereoRig, p: Point3) -> tuple:
    """Project a left-camera-frame point into both cameras.

    The right camera sits baseline_m along +x with the same orientation.
    """
    left = project_point(rig.left, p)
    right = project_point(rig.right, Point3(p.x - rig.baseline_m, p.y, p.z))
    return left, right

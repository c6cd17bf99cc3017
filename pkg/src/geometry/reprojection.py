"""
Reprojection
The 4x4 reprojection matrix Q and the homogeneous pixel-to-3D mapping
"""

from dataclasses import dataclass

import numpy as np

from src.errors import DegenerateW, InvariantViolation, NonPositiveDisparity
from src.geometry.camera import Point3, StereoRig

W_TOLERANCE = 1e-12


@dataclass(frozen=True)
class ReprojectionMatrix:
    """Q: (x, y, d, 1) -> (X, Y, Z, W)"""
    q: np.ndarray

    def __post_init__(self):
        q = np.asarray(self.q, dtype=np.float64)
        if q.shape != (4, 4):
            raise InvariantViolation("reprojection matrix must be 4x4")
        q.setflags(write=False)
        object.__setattr__(self, "q", q)


def build_reprojection_matrix(rig: StereoRig) -> ReprojectionMatrix:
    """Assemble Q for a horizontal rig.

    Tx is the positive baseline and q[3][2] = +1/Tx, so W = d/Tx and
    Z = f*Tx/d stays positive for positive disparity.
    """
    f = rig.f
    cx, cy = rig.left.cx, rig.left.cy
    tx = rig.baseline_m
    q = np.array([
        [1.0, 0.0, 0.0, -cx],
        [0.0, 1.0, 0.0, -cy],
        [0.0, 0.0, 0.0, f],
        [0.0, 0.0, 1.0 / tx, -(cx - rig.right_cx) / tx],
    ])
    return ReprojectionMatrix(q)


def reproject_pixel(q: ReprojectionMatrix, x: float, y: float, d: float) -> Point3:
    """Reproject one pixel with disparity d to a 3D point"""
    if not d > 0:
        raise NonPositiveDisparity(f"disparity {d} is not positive")
    X, Y, Z, W = q.q @ np.array([x, y, d, 1.0])
    if abs(W) < W_TOLERANCE:
        raise DegenerateW(f"|W| = {abs(W):.3e} below tolerance")
    return Point3(X / W, Y / W, Z / W)


def reproject_many(q: ReprojectionMatrix, xs: np.ndarray, ys: np.ndarray,
                   ds: np.ndarray) -> np.ndarray:
    """Vectorised reproject_pixel; returns an (N, 3) array.

    Entries with d <= 0 or a degenerate W come back as NaN rows.
    """
    xs = np.asarray(xs, dtype=np.float64)
    hom = np.stack([xs, np.asarray(ys, dtype=np.float64),
                    np.asarray(ds, dtype=np.float64), np.ones_like(xs)])
    out = q.q @ hom
    w = out[3]
    bad = (np.asarray(ds) <= 0) | (np.abs(w) < W_TOLERANCE)
    with np.errstate(divide="ignore", invalid="ignore"):
        pts = (out[:3] / w).T
    pts[bad] = np.nan
    return pts

"""
PLY Files
ASCII PLY persistence of colored clouds with the capture pose in a header comment
"""

from pathlib import Path
from typing import Union

import numpy as np
from plyfile import PlyData, PlyElement

from src.errors import ParseError
from src.geometry.pose import Pose2D
from src.reconstruction.pointcloud import PointCloud
from src.resources.files import atomic_write

VERTEX_DTYPE = [
    ("x", "f4"), ("y", "f4"), ("z", "f4"),
    ("red", "u1"), ("green", "u1"), ("blue", "u1"),
]
POSE_TAG = "pose"


def write_ply(path: Union[str, Path], cloud: PointCloud) -> None:
    """Write float32 xyz + uchar rgb vertices as ASCII PLY"""
    vertex = np.empty(len(cloud), dtype=VERTEX_DTYPE)
    for i, axis in enumerate("xyz"):
        vertex[axis] = cloud.positions[:, i]
    for i, channel in enumerate(("red", "green", "blue")):
        vertex[channel] = cloud.colors[:, i]

    pose = cloud.source_pose
    ply = PlyData(
        [PlyElement.describe(vertex, "vertex")],
        text=True,
        comments=[f"{POSE_TAG} {pose.x:.6f} {pose.y:.6f} {pose.theta:.6f}"],
    )
    with atomic_write(path, "wb") as handle:
        ply.write(handle)


def read_ply(path: Union[str, Path]) -> PointCloud:
    """Read a PLY written by write_ply (or any PLY with xyz + rgb vertices)"""
    ply = PlyData.read(str(path))
    try:
        vertex = ply["vertex"]
    except KeyError as e:
        raise ParseError("PLY has no vertex element", source=str(path)) from e

    pose = Pose2D()
    for comment in ply.comments:
        parts = comment.split()
        if len(parts) == 4 and parts[0] == POSE_TAG:
            try:
                pose = Pose2D(*(float(p) for p in parts[1:]))
            except ValueError as e:
                raise ParseError(f"bad pose comment {comment!r}", source=str(path)) from e

    data = vertex.data
    positions = np.column_stack([data["x"], data["y"], data["z"]]).astype(np.float64)
    colors = np.column_stack([data["red"], data["green"], data["blue"]]).astype(np.uint8)
    return PointCloud(positions, colors, pose)

"""
Point Cloud
Reprojection of disparity maps into colored clouds, cluster/range filtering and pose registration
"""

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence, Tuple

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from src.errors import InvariantViolation, ParamsInvalid, SizeMismatch
from src.geometry.camera import Point3
from src.geometry.pose import Pose2D
from src.geometry.reprojection import ReprojectionMatrix, reproject_many
from src.stereo.images import ColorImage, DisparityMap

# neighbour voxel offsets, one of each +-o pair
_HALF_OFFSETS = sorted(
    (o for o in itertools.product(range(-2, 3), repeat=3) if o > (0, 0, 0)),
    key=lambda o: sum(c * c for c in o),
)


@dataclass(frozen=True)
class CloudFilterParams:
    min_cluster: int = 30
    cluster_radius: float = 0.05
    max_range: float = 5.0

    def __post_init__(self):
        if self.min_cluster < 1 or not self.cluster_radius > 0 or not self.max_range > 0:
            raise ParamsInvalid("cloud filter parameters must be positive")


@dataclass(frozen=True)
class ColoredPoint:
    position: Point3
    color: Tuple[int, int, int]


@dataclass(frozen=True)
class PointCloud:
    """N positions (meters) with N RGB colors and the capture pose"""
    positions: np.ndarray = field(default_factory=lambda: np.zeros((0, 3)))
    colors: np.ndarray = field(default_factory=lambda: np.zeros((0, 3), dtype=np.uint8))
    source_pose: Pose2D = field(default_factory=Pose2D)

    def __post_init__(self):
        positions = np.asarray(self.positions, dtype=np.float64).reshape(-1, 3)
        colors = np.asarray(self.colors, dtype=np.uint8).reshape(-1, 3)
        if len(positions) != len(colors):
            raise InvariantViolation("every point needs exactly one color")
        if not np.isfinite(positions).all():
            raise InvariantViolation("point positions must be finite")
        object.__setattr__(self, "positions", positions)
        object.__setattr__(self, "colors", colors)

    def __len__(self) -> int:
        return len(self.positions)

    def points(self) -> Iterator[ColoredPoint]:
        for p, c in zip(self.positions, self.colors):
            yield ColoredPoint(Point3(*p), (int(c[0]), int(c[1]), int(c[2])))

    def subset(self, keep: np.ndarray) -> "PointCloud":
        return PointCloud(self.positions[keep], self.colors[keep], self.source_pose)


def cloud_from_disparity(dm: DisparityMap, rgb: ColorImage, q: ReprojectionMatrix,
                         pose: Pose2D = Pose2D()) -> PointCloud:
    """One camera-frame point per valid positive-disparity pixel, in raster order"""
    if (dm.height, dm.width) != (rgb.height, rgb.width):
        raise SizeMismatch(f"disparity {dm.data.shape[:2]} and color {rgb.data.shape[:2]} differ")
    disparity = dm.to_pixels()
    with np.errstate(invalid="ignore"):
        ys, xs = np.nonzero(disparity > 0)
    points = reproject_many(q, xs, ys, disparity[ys, xs])
    finite = np.isfinite(points).all(axis=1)
    return PointCloud(points[finite], rgb.data[ys[finite], xs[finite]], pose)


def _components(count: int, first: Sequence[int], second: Sequence[int]) -> np.ndarray:
    """Connected component id per voxel from the linked voxel pairs"""
    graph = coo_matrix((np.ones(len(first), dtype=np.int8), (first, second)),
                       shape=(count, count))
    _, labels = connected_components(graph, directed=False)
    return labels


def cluster_labels(positions: np.ndarray, radius: float) -> np.ndarray:
    """Single-linkage component id per point (link iff distance <= radius).

    Points sharing a voxel of edge radius/sqrt(3) are always linked; voxel
    pairs up to two cells apart are linked when their closest points are.
    Offsets are visited nearest first and pairs already connected skip the
    point query.
    """
    n = len(positions)
    if n == 0:
        return np.zeros(0, dtype=np.int64)

    size = radius / math.sqrt(3.0) * (1.0 - 1e-9)
    keys = np.floor(positions / size).astype(np.int64)
    voxels, inverse = np.unique(keys, axis=0, return_inverse=True)
    inverse = inverse.ravel()
    order = np.argsort(inverse, kind="stable")
    members = np.split(order, np.cumsum(np.bincount(inverse))[:-1])
    voxel_keys = voxels.tolist()
    index = {tuple(v): i for i, v in enumerate(voxel_keys)}

    count = len(voxels)
    labels = np.arange(count)
    first, second = [], []
    trees = {}
    bound = np.nextafter(radius, np.inf)
    for off in _HALF_OFFSETS:
        for a, key in enumerate(voxel_keys):
            b = index.get((key[0] + off[0], key[1] + off[1], key[2] + off[2]))
            if b is None or labels[a] == labels[b]:
                continue
            if b not in trees:
                trees[b] = cKDTree(positions[members[b]])
            dist, _ = trees[b].query(positions[members[a]], k=1, distance_upper_bound=bound)
            if np.isfinite(dist).any():
                first.append(a)
                second.append(b)
        if first:
            labels = _components(count, first, second)
    return labels[inverse].astype(np.int64)


def filter_cloud(c: PointCloud, p: CloudFilterParams) -> PointCloud:
    """Drop points beyond max_range, then points in clusters under min_cluster"""
    in_range = np.linalg.norm(c.positions, axis=1) <= p.max_range
    ranged = c.subset(in_range)
    if len(ranged) == 0:
        return ranged
    labels = cluster_labels(ranged.positions, p.cluster_radius)
    _, local, counts = np.unique(labels, return_inverse=True, return_counts=True)
    return ranged.subset(counts[local.ravel()] >= p.min_cluster)


def camera_to_body(c: PointCloud, camera_height: float) -> PointCloud:
    """Camera frame (x right, y down, z forward) to robot frame (x forward, y left, z up)"""
    x, y, z = c.positions.T
    body = np.column_stack([z, -x, camera_height - y])
    return PointCloud(body, c.colors, c.source_pose)


def transform_cloud(c: PointCloud, pose: Pose2D) -> PointCloud:
    """Rotate by theta about the vertical axis, then translate by (x, y)"""
    cos_t, sin_t = math.cos(pose.theta), math.sin(pose.theta)
    x, y, z = c.positions.T
    world = np.column_stack([
        cos_t * x - sin_t * y + pose.x,
        sin_t * x + cos_t * y + pose.y,
        z,
    ])
    return PointCloud(world, c.colors, pose)


def merge_clouds(clouds: Sequence[PointCloud]) -> PointCloud:
    """Concatenate world-frame clouds in list order"""
    if not clouds:
        return PointCloud()
    return PointCloud(
        np.vstack([c.positions for c in clouds]),
        np.vstack([c.colors for c in clouds]),
        clouds[0].source_pose,
    )


def register_frame(c: PointCloud, pose: Pose2D, camera_height: float,
                   params: CloudFilterParams) -> PointCloud:
    """Filter a camera-frame cloud and place it in the world at `pose`"""
    return transform_cloud(camera_to_body(filter_cloud(c, params), camera_height), pose)

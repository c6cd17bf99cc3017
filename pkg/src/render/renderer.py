"""
Stereo Renderer
Ray casts textured boxes and the floor through both rig cameras with exact ground-truth disparity
"""

import math
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from src.calib.epipolar import Correspondence
from src.errors import InvariantViolation, ParamsInvalid
from src.geometry.camera import StereoRig
from src.geometry.pose import Pose2D
from src.render.texture import procedural_texture
from src.resources.image_io import MAX_STORABLE_DISP
from src.sim.world import WorldModel
from src.stereo.images import ColorImage, DisparityMap, GrayImage

BACKGROUND = 40
RAY_EPSILON = 1e-9
OCCLUSION_TOLERANCE_PX = 1.0


@dataclass(frozen=True)
class RenderParams:
    floor_seed: int = 7
    texture_scale: float = 0.02
    noise_sigma: float = 0.0
    seed: int = 0
    vertical_offset_px: float = 0.0

    def __post_init__(self):
        if not self.texture_scale > 0:
            raise ParamsInvalid("texture_scale must be positive")
        if self.noise_sigma < 0:
            raise ParamsInvalid("noise_sigma must be non-negative")


@dataclass(frozen=True)
class Scene:
    """World seen from a camera at `pose`, `camera_height` above the floor"""
    world: WorldModel
    pose: Pose2D
    camera_height: float = 0.25

    def __post_init__(self):
        if not self.world.on_floor(self.pose.x, self.pose.y):
            raise InvariantViolation("camera must stand inside the floor extent")
        if not self.camera_height > 0:
            raise InvariantViolation("camera height must be positive")


@dataclass(frozen=True)
class RenderOutput:
    left: GrayImage
    right: GrayImage
    left_color: ColorImage
    right_color: ColorImage
    gt_disparity_px: np.ndarray     # float pixels, NaN where invalid
    gt_disparity: DisparityMap
    occluded: np.ndarray
    depth: np.ndarray               # left-camera Z in meters, NaN for background
    vertical_offset_px: float = 0.0


@dataclass
class _View:
    depth: np.ndarray
    intensity: np.ndarray
    tint: np.ndarray


def _tint(seed: int) -> np.ndarray:
    """Per-surface RGB multiplier in [0.6, 1]"""
    rng = np.random.default_rng(seed & 0xFFFFFFFF)
    return 0.6 + 0.4 * rng.random(3)


def _camera_basis(pose: Pose2D) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Forward, right and down unit vectors in the world frame"""
    c, s = math.cos(pose.theta), math.sin(pose.theta)
    return np.array([c, s, 0.0]), np.array([s, -c, 0.0]), np.array([0.0, 0.0, -1.0])


def _footprint(t: np.ndarray, dirs: np.ndarray, normal: np.ndarray, f: float) -> np.ndarray:
    """Surface length in meters covered by one pixel along the steepest direction"""
    norm2 = (dirs ** 2).sum(axis=-1)
    return t * norm2 / (f * np.maximum(np.abs(normal), RAY_EPSILON))


def _cast(scene: Scene, params: RenderParams, origin: np.ndarray, f: float, cx: float,
          cy: float, width: int, height: int) -> _View:
    """Depth, intensity and tint per pixel for one pinhole camera"""
    forward, right, down = _camera_basis(scene.pose)
    us, vs = np.meshgrid(np.arange(width, dtype=np.float64),
                         np.arange(height, dtype=np.float64))
    a = (us - cx) / f
    b = (vs - cy) / f
    # forward component is 1, so the ray parameter equals camera depth Z
    dirs = forward[None, None] + a[..., None] * right[None, None] + b[..., None] * down[None, None]

    depth = np.full((height, width), np.inf)
    intensity = np.full((height, width), float(BACKGROUND))
    tint = np.ones((height, width, 3))

    with np.errstate(divide="ignore", invalid="ignore"):
        t_floor = np.where(dirs[..., 2] < 0, -origin[2] / dirs[..., 2], np.inf)
        hit = origin[None, None] + t_floor[..., None] * dirs
    on_floor = (np.isfinite(t_floor) & (hit[..., 0] >= 0) & (hit[..., 0] <= scene.world.floor_w)
                & (hit[..., 1] >= 0) & (hit[..., 1] <= scene.world.floor_h))
    depth[on_floor] = t_floor[on_floor]
    intensity[on_floor] = procedural_texture(
        params.floor_seed,
        hit[on_floor][:, 0] / params.texture_scale,
        hit[on_floor][:, 1] / params.texture_scale,
        _footprint(t_floor[on_floor], dirs[on_floor], dirs[on_floor][:, 2], f)
        / params.texture_scale,
    )
    tint[on_floor] = _tint(params.floor_seed)

    for box in scene.world.boxes:
        lo = np.array([box.x, box.y, 0.0])
        hi = np.array([box.x1, box.y1, box.height])
        with np.errstate(divide="ignore", invalid="ignore"):
            t0 = (lo - origin) / dirs
            t1 = (hi - origin) / dirs
        # rays parallel to a slab: inside -> unbounded, outside -> miss
        parallel = dirs == 0
        inside = (origin >= lo) & (origin <= hi)
        t_min = np.where(parallel, np.where(inside, -np.inf, np.inf), np.minimum(t0, t1))
        t_max = np.where(parallel, np.where(inside, np.inf, -np.inf), np.maximum(t0, t1))
        t_near = t_min.max(axis=-1)
        t_far = t_max.min(axis=-1)
        closer = (t_near <= t_far) & (t_near > RAY_EPSILON) & (t_near < depth)
        if not closer.any():
            continue

        axis = t_min.argmax(axis=-1)[closer]
        t = t_near[closer]
        point = origin[None] + t[:, None] * dirs[closer]
        # face texture coordinates: x-faces (y, z), y-faces (x, z), top (x, y)
        fu = np.where(axis == 0, point[:, 1], point[:, 0])
        fv = np.where(axis == 2, point[:, 1], point[:, 2])
        depth[closer] = t
        normal = np.take_along_axis(dirs[closer], axis[:, None], axis=1)[:, 0]
        intensity[closer] = procedural_texture(
            box.seed, fu / params.texture_scale, fv / params.texture_scale,
            _footprint(t, dirs[closer], normal, f) / params.texture_scale,
        )
        tint[closer] = _tint(box.seed)

    depth[~np.isfinite(depth)] = np.nan
    return _View(depth, intensity, tint)


def _finish(view: _View, noise: np.ndarray) -> Tuple[GrayImage, ColorImage]:
    gray = np.clip(np.rint(view.intensity + noise), 0, 255).astype(np.uint8)
    color = np.clip(np.rint((view.intensity + noise)[..., None] * view.tint), 0, 255)
    return GrayImage(gray), ColorImage(color.astype(np.uint8))


def render_stereo(scene: Scene, rig: StereoRig,
                  params: RenderParams = RenderParams()) -> RenderOutput:
    """Render the left/right pair and the left-view ground truth"""
    _, right, _ = _camera_basis(scene.pose)
    left_origin = np.array([scene.pose.x, scene.pose.y, scene.camera_height])
    right_origin = left_origin + rig.baseline_m * right
    w, h, f = rig.width, rig.height, rig.f

    left_view = _cast(scene, params, left_origin, f, rig.left.cx, rig.left.cy, w, h)
    right_view = _cast(scene, params, right_origin, f, rig.right_cx,
                       rig.right.cy + params.vertical_offset_px, w, h)

    offset = rig.left.cx - rig.right_cx
    with np.errstate(invalid="ignore"):
        gt = f * rig.baseline_m / left_view.depth + offset
        right_gt = f * rig.baseline_m / right_view.depth + offset

    # visible on the left but hidden or out of frame on the right
    us = np.arange(w)[None, :].repeat(h, axis=0)
    rows = np.arange(h)[:, None].repeat(w, axis=1)
    valid = np.isfinite(gt)
    target = np.rint(us - np.where(valid, gt, 0.0)).astype(np.int64)
    in_frame = valid & (target >= 0) & (target < w)
    seen = np.where(in_frame, right_gt[rows, np.clip(target, 0, w - 1)], np.nan)
    with np.errstate(invalid="ignore"):
        blocked = in_frame & (seen > gt + OCCLUSION_TOLERANCE_PX)
    occluded = valid & (~in_frame | blocked)
    gt = np.where(occluded, np.nan, gt)

    rng = np.random.default_rng(params.seed)
    if params.noise_sigma > 0:
        noise_left = rng.normal(0.0, params.noise_sigma, (h, w))
        noise_right = rng.normal(0.0, params.noise_sigma, (h, w))
    else:
        noise_left = noise_right = np.zeros((h, w))
    left_gray, left_color = _finish(left_view, noise_left)
    right_gray, right_color = _finish(right_view, noise_right)

    return RenderOutput(
        left=left_gray,
        right=right_gray,
        left_color=left_color,
        right_color=right_color,
        gt_disparity_px=gt,
        gt_disparity=DisparityMap.from_pixels(gt, 0, MAX_STORABLE_DISP),
        occluded=occluded,
        depth=left_view.depth,
        vertical_offset_px=params.vertical_offset_px,
    )


def correspondences_from_render(out: RenderOutput, count: int,
                                seed: int = 0) -> List[Correspondence]:
    """Sample matched pixel pairs from non-occluded ground truth"""
    ys, xs = np.nonzero(np.isfinite(out.gt_disparity_px))
    if len(xs) == 0:
        return []
    rng = np.random.default_rng(seed)
    pick = rng.choice(len(xs), size=min(count, len(xs)), replace=False)
    pairs = []
    for i in np.sort(pick):
        x, y = float(xs[i]), float(ys[i])
        d = float(out.gt_disparity_px[ys[i], xs[i]])
        pairs.append(Correspondence.from_xy(x, y, x - d, y + out.vertical_offset_px))
    return pairs

"""
Obstacle Detector
Depth-band segmentation, blob extraction and the reactive navigation decision
"""

import csv
import warnings
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import List, Sequence, Tuple, Union

import numpy as np
from scipy import ndimage

from src.errors import BandOutsideHoropter, InvariantViolation, ParamsInvalid
from src.geometry.camera import StereoRig
from src.resources.files import atomic_write
from src.stereo.images import DISP_SCALE, DisparityMap

EIGHT_CONNECTED = np.ones((3, 3), dtype=bool)
BLOB_CSV_HEADER = ["x0", "y0", "x1", "y1", "cx", "cy", "area"]
TURN_DIRECTIONS = ("left", "right")


class Decision(Enum):
    """Navigation command, one per evaluated frame"""
    FORWARD = "Forward"
    TURN_LEFT = "TurnLeft"
    TURN_RIGHT = "TurnRight"
    TURN90 = "Turn90"
    STOP = "Stop"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class ObstacleParams:
    z_near: float = 0.20
    z_far: float = 0.40
    min_area: int = 150
    turn90_direction: str = "right"

    def __post_init__(self):
        if not 0 < self.z_near < self.z_far:
            raise ParamsInvalid("depth band needs 0 < z_near < z_far")
        if self.min_area < 1:
            raise ParamsInvalid("min_area must be at least 1")
        if self.turn90_direction not in TURN_DIRECTIONS:
            raise ParamsInvalid(f"turn90_direction must be one of {TURN_DIRECTIONS}")


@dataclass(frozen=True)
class BinaryMask:
    """One bit per pixel"""
    bits: np.ndarray

    def __post_init__(self):
        bits = np.asarray(self.bits)
        if bits.ndim != 2:
            raise InvariantViolation("mask must be two-dimensional")
        object.__setattr__(self, "bits", bits.astype(bool))

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    def count(self) -> int:
        return int(self.bits.sum())

    @classmethod
    def empty(cls, width: int, height: int) -> "BinaryMask":
        return cls(np.zeros((height, width), dtype=bool))


@dataclass(frozen=True)
class Blob:
    """Connected region; bbox corners are inclusive pixel indices"""
    bbox: Tuple[int, int, int, int]
    centroid: Tuple[float, float]
    area: int


def dilate3x3(m: BinaryMask) -> BinaryMask:
    """Set every pixel with a set 3x3 neighbour (window clipped at the border)"""
    return BinaryMask(ndimage.binary_dilation(m.bits, structure=EIGHT_CONNECTED, border_value=0))


def band_limits(rig: StereoRig, z_near: float, z_far: float) -> Tuple[float, float]:
    """Disparity interval [f*T/z_far, f*T/z_near] in pixels"""
    ft = rig.f * rig.baseline_m
    return ft / z_far, ft / z_near


def segment_near(dm: DisparityMap, rig: StereoRig, z_near: float = 0.20,
                 z_far: float = 0.40) -> BinaryMask:
    """Valid pixels whose depth lies in [z_near, z_far], dilated once"""
    if not 0 < z_near < z_far:
        raise ParamsInvalid("depth band needs 0 < z_near < z_far")
    d_lo, d_hi = band_limits(rig, z_near, z_far)
    if d_lo < dm.min_disp or d_hi > dm.max_disp:
        warnings.warn(BandOutsideHoropter(
            f"depth band [{z_near}, {z_far}] m maps to disparities "
            f"[{d_lo:.2f}, {d_hi:.2f}] outside [{dm.min_disp}, {dm.max_disp}]"
        ), stacklevel=2)

    # compare in fixed point; the epsilon only absorbs float noise, not a 1/16 step
    lo, hi = d_lo * DISP_SCALE - 1e-6, d_hi * DISP_SCALE + 1e-6
    values = dm.data.astype(np.float64)
    band = dm.valid_mask() & (values >= lo) & (values <= hi)
    return dilate3x3(BinaryMask(band))


def find_blobs(m: BinaryMask, min_area: int = 150) -> List[Blob]:
    """8-connected components with at least min_area pixels, in raster label order"""
    labels, count = ndimage.label(m.bits, structure=EIGHT_CONNECTED)
    if count == 0:
        return []

    flat = labels.ravel()
    ys, xs = np.indices(labels.shape)
    areas = np.bincount(flat, minlength=count + 1)
    sum_x = np.bincount(flat, weights=xs.ravel(), minlength=count + 1)
    sum_y = np.bincount(flat, weights=ys.ravel(), minlength=count + 1)

    blobs = []
    for label, slices in enumerate(ndimage.find_objects(labels), start=1):
        area = int(areas[label])
        if slices is None or area < min_area:
            continue
        rows, cols = slices
        blobs.append(Blob(
            bbox=(cols.start, rows.start, cols.stop - 1, rows.stop - 1),
            centroid=(sum_x[label] / area, sum_y[label] / area),
            area=area,
        ))
    return blobs


def decide(blobs: Sequence[Blob], image_width: int) -> Decision:
    """Steer away from the occupied half; both halves occupied means Turn90"""
    if image_width <= 0:
        raise ParamsInvalid("image width must be positive")
    half = image_width / 2.0
    in_left = any(b.centroid[0] < half for b in blobs)
    in_right = any(b.centroid[0] >= half for b in blobs)
    if in_left and in_right:
        return Decision.TURN90
    if in_left:
        return Decision.TURN_RIGHT
    if in_right:
        return Decision.TURN_LEFT
    return Decision.FORWARD


def detect(dm: DisparityMap, rig: StereoRig,
           params: ObstacleParams) -> Tuple[BinaryMask, List[Blob], Decision]:
    """Segment, extract blobs and decide for one disparity map"""
    mask = segment_near(dm, rig, params.z_near, params.z_far)
    blobs = find_blobs(mask, params.min_area)
    return mask, blobs, decide(blobs, dm.width)


def write_blobs_csv(path: Union[str, Path], blobs: Sequence[Blob]) -> None:
    with atomic_write(path) as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(BLOB_CSV_HEADER)
        for b in blobs:
            writer.writerow([*b.bbox, f"{b.centroid[0]:.2f}", f"{b.centroid[1]:.2f}", b.area])

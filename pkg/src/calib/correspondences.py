"""
Correspondence Files
CSV persistence of matched pixel pairs and seeded synthetic correspondence sets
"""

import csv
from pathlib import Path
from typing import List, Sequence, Tuple, Union

import numpy as np

from src.calib.epipolar import Correspondence
from src.errors import InvariantViolation, ParseError
from src.geometry.camera import Point3, StereoRig, project_stereo
from src.resources.files import atomic_write

HEADER = ["xl", "yl", "xr", "yr"]


def read_correspondences(path: Union[str, Path]) -> List[Correspondence]:
    """Read `xl,yl,xr,yr` rows; a leading header row is optional"""
    source = str(path)
    corrs = []
    with open(path, newline="", encoding="utf-8") as handle:
        for line, row in enumerate(csv.reader(handle), start=1):
            if not row or row[0].lstrip().startswith("#"):
                continue
            if line == 1 and [cell.strip() for cell in row] == HEADER:
                continue
            if len(row) != 4:
                raise ParseError(f"expected 4 fields, got {len(row)}", line, source)
            try:
                corrs.append(Correspondence.from_xy(*(float(cell) for cell in row)))
            except (ValueError, InvariantViolation) as e:
                raise ParseError(f"bad correspondence: {e}", line, source) from e
    return corrs


def write_correspondences(path: Union[str, Path], corrs: Sequence[Correspondence]) -> None:
    with atomic_write(path) as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(HEADER)
        for c in corrs:
            writer.writerow([f"{v:.6f}" for v in (c.left.x, c.left.y, c.right.x, c.right.y)])


def check_bounds(corrs: Sequence[Correspondence], width: int, height: int) -> None:
    """Raise InvariantViolation for the first pair outside the image"""
    for i, c in enumerate(corrs):
        if not c.inside(width, height):
            raise InvariantViolation(f"correspondence {i} lies outside {width}x{height}")


def synthesize_correspondences(rig: StereoRig, count: int, seed: int = 0,
                               outliers: int = 0, noise_px: float = 0.0,
                               vertical_offset_px: float = 0.0,
                               depth_range: Tuple[float, float] = (1.0, 5.0)
                               ) -> List[Correspondence]:
    """Project random scene points through the rig.

    The first `count` entries are true matches (optionally jittered and
    shifted vertically), followed by `outliers` uniformly random pairs.
    """
    rng = np.random.default_rng(seed)
    z_min, z_max = depth_range
    shift = rig.f * rig.baseline_m / z_min + abs(rig.left.cx - rig.right_cx)
    margin = 2.0 + abs(vertical_offset_px) + 4.0 * noise_px
    u = rng.uniform(shift + margin, rig.width - margin, count)
    v = rng.uniform(margin, rig.height - margin, count)
    z = rng.uniform(z_min, z_max, count)

    corrs = []
    for ui, vi, zi in zip(u, v, z):
        point = Point3((ui - rig.left.cx) * zi / rig.f, (vi - rig.left.cy) * zi / rig.f, zi)
        left, right = project_stereo(rig, point)
        jitter = rng.normal(0.0, noise_px, 4) if noise_px > 0 else np.zeros(4)
        corrs.append(Correspondence.from_xy(
            left.x + jitter[0], left.y + jitter[1],
            right.x + jitter[2], right.y + jitter[3] + vertical_offset_px,
        ))

    for _ in range(outliers):
        xl, xr = rng.uniform(0, rig.width, 2)
        yl, yr = rng.uniform(0, rig.height, 2)
        corrs.append(Correspondence.from_xy(xl, yl, xr, yr))
    return corrs

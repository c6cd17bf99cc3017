"""
Occupancy Grid
Log-odds 2D map built from the forward ultrasound readings along odometric poses
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, List, Optional, Set, Tuple, Union

import numpy as np

from src.errors import InvariantViolation, ParamsInvalid
from src.geometry.pose import Pose2D
from src.resources.files import atomic_write, format_key_values
from src.resources.image_io import write_gray
from src.stereo.images import GrayImage

MAX_RANGE = math.inf  # "no echo" flag

L_OCCUPIED = 0.9
L_FREE = -0.4
L_MAX = 4.0
L_MIN = -4.0
L_THRESHOLD = 1.0

# sensor 0 looks right, 1 straight ahead, 2 left
DEFAULT_SENSOR_ANGLES = (math.radians(-20.0), 0.0, math.radians(20.0))
CELL_EPSILON = 1e-9

PGM_FREE = 255
PGM_UNKNOWN = 128
PGM_OCCUPIED = 0


class CellState(Enum):
    OCCUPIED = "Occupied"
    FREE = "Free"
    UNKNOWN = "Unknown"


@dataclass(frozen=True)
class MapParams:
    resolution: float = 0.05
    origin_x: float = -5.0
    origin_y: float = -5.0
    width_m: float = 10.0
    height_m: float = 10.0

    def __post_init__(self):
        if not self.resolution > 0:
            raise ParamsInvalid("map resolution must be positive")
        if not (self.width_m > 0 and self.height_m > 0):
            raise ParamsInvalid("map extent must be positive")


@dataclass(frozen=True)
class SensorGeometry:
    """Mounting angles (robot frame, radians) of the ultrasound sensors"""
    angles: Tuple[float, ...] = DEFAULT_SENSOR_ANGLES
    max_range: float = 3.0
    cone_deg: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.cone_deg < 180.0:
            raise ParamsInvalid("cone_deg must lie in [0, 180)")
        if not self.max_range > 0:
            raise ParamsInvalid("sensor max_range must be positive")


@dataclass(frozen=True)
class UltrasoundReading:
    sensor_index: int
    range: float
    pose: Pose2D = field(default_factory=Pose2D)
    t: float = 0.0

    def __post_init__(self):
        if self.sensor_index not in (0, 1, 2):
            raise InvariantViolation("sensor index must be 0, 1 or 2")
        if not self.range > 0:
            raise InvariantViolation(f"range {self.range} must be positive")

    @property
    def is_max_range(self) -> bool:
        return math.isinf(self.range)


class OccupancyGrid:
    """Clamped log-odds cells indexed [iy, ix]; cell (0, 0) starts at the origin"""

    def __init__(self, params: MapParams = MapParams()):
        self.resolution = params.resolution
        self.origin = (params.origin_x, params.origin_y)
        nx = int(math.ceil(params.width_m / params.resolution - CELL_EPSILON))
        ny = int(math.ceil(params.height_m / params.resolution - CELL_EPSILON))
        self.cells = np.zeros((ny, nx), dtype=np.float64)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.cells.shape

    def world_to_cell(self, x: float, y: float) -> Tuple[int, int]:
        """(ix, iy) of the cell containing a world point, possibly outside"""
        ix = math.floor((x - self.origin[0]) / self.resolution + CELL_EPSILON)
        iy = math.floor((y - self.origin[1]) / self.resolution + CELL_EPSILON)
        return ix, iy

    def cell_center(self, ix: int, iy: int) -> Tuple[float, float]:
        return (self.origin[0] + (ix + 0.5) * self.resolution,
                self.origin[1] + (iy + 0.5) * self.resolution)

    def contains(self, ix: int, iy: int) -> bool:
        ny, nx = self.cells.shape
        return 0 <= ix < nx and 0 <= iy < ny

    def add(self, ix: int, iy: int, delta: float) -> None:
        if self.contains(ix, iy):
            self.cells[iy, ix] = min(L_MAX, max(L_MIN, self.cells[iy, ix] + delta))

    def occupied_cells(self) -> List[Tuple[int, int]]:
        iy, ix = np.nonzero(self.cells > L_THRESHOLD)
        return list(zip(ix.tolist(), iy.tolist()))


def bresenham(x0: int, y0: int, x1: int, y1: int) -> List[Tuple[int, int]]:
    """Integer cells on the segment, both endpoints included"""
    cells = []
    dx, sx = abs(x1 - x0), (1 if x0 < x1 else -1)
    dy, sy = -abs(y1 - y0), (1 if y0 < y1 else -1)
    err = dx + dy
    x, y = x0, y0
    while True:
        cells.append((x, y))
        if x == x1 and y == y1:
            return cells
        e2 = 2 * err
        if e2 >= dy:
            err += dy
            x += sx
        if e2 <= dx:
            err += dx
            y += sy


def _ray_end(pose: Pose2D, angle: float, distance: float) -> Tuple[float, float]:
    return pose.x + distance * math.cos(angle), pose.y + distance * math.sin(angle)


def integrate_reading(g: OccupancyGrid, r: UltrasoundReading,
                      geometry: SensorGeometry = SensorGeometry()) -> OccupancyGrid:
    """Free the cells between robot and echo, mark the echo cell occupied.

    MAX_RANGE readings (or ranges beyond the sensor limit) only free cells
    up to the sensor limit. Cells outside the grid are skipped.
    """
    start = g.world_to_cell(r.pose.x, r.pose.y)
    hit = not r.is_max_range and r.range <= geometry.max_range
    distance = r.range if hit else geometry.max_range
    bearing = r.pose.theta + geometry.angles[r.sensor_index]

    bearings = [bearing]
    if geometry.cone_deg > 0:
        half = math.radians(geometry.cone_deg) / 2.0
        bearings += [bearing - half, bearing + half]

    end_cell = g.world_to_cell(*_ray_end(r.pose, bearing, distance))
    free: Set[Tuple[int, int]] = set()
    for b in bearings:
        ray = bresenham(*start, *g.world_to_cell(*_ray_end(r.pose, b, distance)))
        free.update(ray[1:-1] if hit else ray[1:])
    if hit:
        free.discard(end_cell)
    free.discard(start)

    for cell in sorted(free):
        g.add(*cell, L_FREE)
    if hit:
        g.add(*end_cell, L_OCCUPIED)
    return g


def integrate_all(g: OccupancyGrid, readings: Iterable[UltrasoundReading],
                  geometry: SensorGeometry = SensorGeometry()) -> OccupancyGrid:
    for r in readings:
        integrate_reading(g, r, geometry)
    return g


def query_cell(g: OccupancyGrid, x: float, y: float) -> CellState:
    """Thresholded state of the cell at a world point; Unknown outside the grid"""
    ix, iy = g.world_to_cell(x, y)
    if not g.contains(ix, iy):
        return CellState.UNKNOWN
    value = g.cells[iy, ix]
    if value > L_THRESHOLD:
        return CellState.OCCUPIED
    if value < -L_THRESHOLD:
        return CellState.FREE
    return CellState.UNKNOWN


def to_gray(g: OccupancyGrid) -> GrayImage:
    """Map image with north up: row 0 holds the highest-y cells"""
    image = np.full(g.cells.shape, PGM_UNKNOWN, dtype=np.uint8)
    image[g.cells > L_THRESHOLD] = PGM_OCCUPIED
    image[g.cells < -L_THRESHOLD] = PGM_FREE
    return GrayImage(np.flipud(image))


def export_map(g: OccupancyGrid, pgm_path: Union[str, Path],
               sidecar_path: Optional[Union[str, Path]] = None) -> Path:
    """Write the map PGM and its `<name>.txt` resolution/origin sidecar"""
    pgm_path = Path(pgm_path)
    sidecar = Path(sidecar_path) if sidecar_path else pgm_path.with_suffix(".txt")
    write_gray(pgm_path, to_gray(g))
    ny, nx = g.shape
    with atomic_write(sidecar) as handle:
        handle.write(format_key_values([
            ("resolution", g.resolution),
            ("origin_x", g.origin[0]),
            ("origin_y", g.origin[1]),
            ("width", nx),
            ("height", ny),
        ]))
    return sidecar

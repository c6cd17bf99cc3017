"""
Tests for the occupancy grid and reading logs
"""

import math
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from PIL import Image

from src.errors import InvariantViolation, ParamsInvalid, ParseError
from src.geometry.pose import Pose2D, normalize_angle
from src.mapping.occupancy import (
    L_FREE, L_MAX, L_OCCUPIED, MAX_RANGE, CellState, MapParams, OccupancyGrid, SensorGeometry,
    UltrasoundReading, bresenham, export_map, integrate_all, integrate_reading, query_cell
)
from src.mapping.readings import read_readings_csv, write_readings_csv
from src.sim.kinematics import RobotState
from src.sim.sensors import UltrasoundModel, read_ultrasound
from src.sim.world import load_world

AHEAD = 1


def test_grid_dimensions():
    """Test the default 10 m x 10 m grid at 5 cm"""
    assert OccupancyGrid().shape == (200, 200)


def test_bresenham_endpoints():
    """Test that both endpoints are included"""
    assert bresenham(0, 0, 3, 0) == [(0, 0), (1, 0), (2, 0), (3, 0)]
    assert bresenham(0, 0, 2, 2) == [(0, 0), (1, 1), (2, 2)]
    assert bresenham(2, 1, 2, 1) == [(2, 1)]


def test_integrate_single_hit():
    """Test one echo at 1 m straight ahead of the origin"""
    g = OccupancyGrid()
    integrate_reading(g, UltrasoundReading(AHEAD, 1.0, Pose2D()))
    hit = g.world_to_cell(1.0, 0.0)
    assert g.cells[hit[1], hit[0]] == pytest.approx(L_OCCUPIED)
    assert np.isclose(g.cells, L_FREE).sum() == 19
    start = g.world_to_cell(0.0, 0.0)
    assert g.cells[start[1], start[0]] == 0.0
    assert (g.cells > 0).sum() == 1


def test_integrate_max_range_only_frees():
    """Test that a no-echo reading never marks a cell occupied"""
    g = OccupancyGrid()
    integrate_reading(g, UltrasoundReading(AHEAD, MAX_RANGE, Pose2D()),
                      SensorGeometry(max_range=3.0))
    assert (g.cells > 0).sum() == 0
    assert np.isclose(g.cells, L_FREE).sum() == 60


def test_integrate_saturates():
    """Test the log-odds clamp"""
    g = OccupancyGrid()
    reading = UltrasoundReading(AHEAD, 1.0, Pose2D())
    for _ in range(10):
        integrate_reading(g, reading)
    hit = g.world_to_cell(1.0, 0.0)
    assert g.cells[hit[1], hit[0]] == L_MAX
    assert query_cell(g, 1.0, 0.0) is CellState.OCCUPIED
    assert query_cell(g, 0.5, 0.0) is CellState.FREE


def test_integrate_side_sensor_bearing():
    """Test that sensor 2 looks 20 degrees to the left"""
    g = OccupancyGrid()
    for _ in range(3):
        integrate_reading(g, UltrasoundReading(2, 1.0, Pose2D()))
    angle = math.radians(20.0)
    assert query_cell(g, math.cos(angle), math.sin(angle)) is CellState.OCCUPIED


def test_integrate_cone_frees_more():
    """Test that a cone widens the freed area"""
    narrow, wide = OccupancyGrid(), OccupancyGrid()
    reading = UltrasoundReading(AHEAD, 1.5, Pose2D())
    integrate_reading(narrow, reading, SensorGeometry())
    integrate_reading(wide, reading, SensorGeometry(cone_deg=20.0))
    assert (wide.cells < 0).sum() > (narrow.cells < 0).sum()
    assert (wide.cells > 0).sum() == 1


def test_sensor_geometry_validation():
    """Test the cone and range limits of the sensor description"""
    with pytest.raises(ParamsInvalid):
        SensorGeometry(cone_deg=180.0)
    with pytest.raises(ParamsInvalid):
        SensorGeometry(max_range=0.0)


def test_query_cell_unknown():
    """Test untouched and out-of-grid queries"""
    g = OccupancyGrid()
    assert query_cell(g, 1.0, 1.0) is CellState.UNKNOWN
    assert query_cell(g, 100.0, 0.0) is CellState.UNKNOWN


def test_reading_outside_grid_is_skipped():
    """Test that rays leaving the grid only touch cells inside it"""
    g = OccupancyGrid(MapParams(origin_x=0.0, origin_y=0.0, width_m=1.0, height_m=1.0))
    integrate_reading(g, UltrasoundReading(AHEAD, 2.5, Pose2D(0.5, 0.5, 0.0)))
    assert (g.cells > 0).sum() == 0
    assert (g.cells < 0).sum() == 9


@settings(max_examples=30, deadline=None)
@given(st.permutations(list(range(6))))
def test_integration_order_independent(order):
    """Test that unsaturated updates commute"""
    readings = [
        UltrasoundReading(i % 3, 0.5 + 0.2 * i, Pose2D(0.1 * i, -0.1 * i, 0.3 * i))
        for i in range(6)
    ]
    reference = integrate_all(OccupancyGrid(), readings)
    shuffled = integrate_all(OccupancyGrid(), [readings[i] for i in order])
    np.testing.assert_allclose(shuffled.cells, reference.cells, atol=1e-12)


def test_reading_invariants():
    """Test that bad readings are rejected"""
    with pytest.raises(InvariantViolation):
        UltrasoundReading(3, 1.0)
    with pytest.raises(InvariantViolation):
        UltrasoundReading(0, 0.0)


def test_export_map(tmp_path):
    """Test the PGM levels and the sidecar"""
    g = OccupancyGrid(MapParams(origin_x=0.0, origin_y=0.0, width_m=1.0, height_m=0.5))
    for _ in range(3):
        integrate_reading(g, UltrasoundReading(AHEAD, 0.6, Pose2D(0.1, 0.025, 0.0)))
    sidecar = export_map(g, tmp_path / "map.pgm")
    with Image.open(tmp_path / "map.pgm") as img:
        pixels = np.asarray(img)
    assert pixels.shape == (10, 20)
    assert set(np.unique(pixels)) == {0, 128, 255}
    # row 0 of the image is the top (highest y) row of the grid
    assert pixels[-1, 14] == 0
    assert pixels[-1, 5] == 255
    text = sidecar.read_text()
    assert "resolution = 0.05" in text
    assert "origin_x = 0.0" in text


def test_readings_csv_round_trip(tmp_path):
    """Test the reading log with a no-echo entry"""
    readings = [
        UltrasoundReading(0, 0.75, Pose2D(1.0, 2.0, 0.5), t=0.2),
        UltrasoundReading(1, MAX_RANGE, Pose2D(1.0, 2.0, 0.5), t=0.2),
    ]
    path = tmp_path / "readings.csv"
    write_readings_csv(path, readings)
    assert path.read_text().splitlines()[0] == "t,sensor,range,x,y,theta"
    loaded = read_readings_csv(path)
    assert loaded[0].range == pytest.approx(0.75)
    assert loaded[1].is_max_range
    assert loaded[1].pose == Pose2D(1.0, 2.0, 0.5)


def test_readings_csv_errors(tmp_path):
    """Test that malformed rows report their line"""
    path = tmp_path / "bad.csv"
    path.write_text("t,sensor,range,x,y,theta\n0,1,1.0,0,0,0\n0,7,1.0,0,0,0\n")
    with pytest.raises(ParseError) as info:
        read_readings_csv(path)
    assert info.value.line == 3


def boundary_distance(px: float, py: float, box) -> float:
    """Distance from a point to the outline of a box footprint"""
    dx = max(box.x - px, 0.0, px - box.x1)
    dy = max(box.y - py, 0.0, py - box.y1)
    if dx > 0 or dy > 0:
        return math.hypot(dx, dy)
    return min(px - box.x, box.x1 - px, py - box.y, box.y1 - py)


def test_occupied_cells_lie_on_walls():
    """Test a noise-free sweep of a walled room"""
    world = load_world(Path(__file__).resolve().parent.parent / "scenarios" / "empty_room.world")
    g = OccupancyGrid(MapParams(origin_x=-0.5, origin_y=-0.5, width_m=5.0, height_m=5.0))
    model = UltrasoundModel()
    for x, y in ((2.0, 2.0), (1.2, 2.8), (2.9, 1.1)):
        for step in range(180):
            pose = Pose2D(x, y, normalize_angle(math.radians(2.0 * step)))
            ranges = read_ultrasound(world, RobotState(pose), model)
            for index, rng in enumerate(ranges):
                integrate_reading(g, UltrasoundReading(index, rng, pose))

    occupied = g.occupied_cells()
    assert len(occupied) > 50
    near = 0
    for ix, iy in occupied:
        cx, cy = g.cell_center(ix, iy)
        if min(boundary_distance(cx, cy, b) for b in world.boxes) <= g.resolution:
            near += 1
    assert near / len(occupied) >= 0.9

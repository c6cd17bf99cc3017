"""
Reading Logs
CSV persistence of ultrasound readings (`t,sensor,range,x,y,theta`)
"""

import csv
import math
from pathlib import Path
from typing import List, Sequence, Union

from src.errors import InvariantViolation, ParseError
from src.geometry.pose import Pose2D
from src.mapping.occupancy import UltrasoundReading
from src.resources.files import atomic_write

HEADER = ["t", "sensor", "range", "x", "y", "theta"]


def _format_range(value: float) -> str:
    return "inf" if math.isinf(value) else f"{value:.4f}"


def format_reading(r: UltrasoundReading) -> List[str]:
    return [
        f"{r.t:.3f}", str(r.sensor_index), _format_range(r.range),
        f"{r.pose.x:.6f}", f"{r.pose.y:.6f}", f"{r.pose.theta:.6f}",
    ]


def write_readings_csv(path: Union[str, Path], readings: Sequence[UltrasoundReading]) -> None:
    with atomic_write(path) as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(HEADER)
        writer.writerows(format_reading(r) for r in readings)


def read_readings_csv(path: Union[str, Path]) -> List[UltrasoundReading]:
    """Parse a reading log; `inf` in the range column means no echo"""
    source = str(path)
    readings = []
    with open(path, newline="", encoding="utf-8") as handle:
        for line, row in enumerate(csv.reader(handle), start=1):
            if not row:
                continue
            if line == 1 and [cell.strip() for cell in row] == HEADER:
                continue
            if len(row) != len(HEADER):
                raise ParseError(f"expected {len(HEADER)} fields, got {len(row)}", line, source)
            try:
                t, sensor, rng, x, y, theta = row
                readings.append(UltrasoundReading(
                    sensor_index=int(sensor),
                    range=float(rng),
                    pose=Pose2D(float(x), float(y), float(theta)),
                    t=float(t),
                ))
            except (ValueError, InvariantViolation) as e:
                raise ParseError(f"bad reading: {e}", line, source) from e
    return readings

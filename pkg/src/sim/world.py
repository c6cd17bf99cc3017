"""
World Model
Axis-aligned textured boxes on a rectangular floor, the world file parser and collision checks
"""

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Tuple, Union

from src.errors import InvariantViolation, ParseError
from src.geometry.pose import Pose2D


@dataclass(frozen=True)
class Box:
    """Footprint [x, x+w] x [y, y+h], standing from the floor up to `height`"""
    x: float
    y: float
    w: float
    h: float
    height: float
    seed: int = 0

    def __post_init__(self):
        if not (self.w > 0 and self.h > 0 and self.height > 0):
            raise InvariantViolation("box dimensions must be positive")

    @property
    def x1(self) -> float:
        return self.x + self.w

    @property
    def y1(self) -> float:
        return self.y + self.h


@dataclass(frozen=True)
class WorldModel:
    floor_w: float
    floor_h: float
    boxes: Tuple[Box, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if not (self.floor_w > 0 and self.floor_h > 0):
            raise InvariantViolation("floor extent must be positive")
        object.__setattr__(self, "boxes", tuple(self.boxes))
        for i, b in enumerate(self.boxes):
            if b.x < 0 or b.y < 0 or b.x1 > self.floor_w + 1e-9 or b.y1 > self.floor_h + 1e-9:
                raise InvariantViolation(f"box {i} extends beyond the floor")

    def on_floor(self, x: float, y: float) -> bool:
        return 0 <= x <= self.floor_w and 0 <= y <= self.floor_h


def parse_world(text: str, source: str = "") -> WorldModel:
    """Parse `floor w h` and `box x y w h height seed` lines"""
    floor = None
    boxes: List[Box] = []
    for number, raw in enumerate(text.splitlines(), start=1):
        parts = raw.split("#", 1)[0].split()
        if not parts:
            continue
        kind, args = parts[0], parts[1:]
        try:
            if kind == "floor" and len(args) == 2:
                if floor is not None:
                    raise ParseError("duplicate floor line", number, source)
                floor = (float(args[0]), float(args[1]))
            elif kind == "box" and len(args) == 6:
                boxes.append(Box(*(float(a) for a in args[:5]), seed=int(args[5])))
            else:
                raise ParseError(f"unrecognised world line {raw.strip()!r}", number, source)
        except (ValueError, InvariantViolation) as e:
            raise ParseError(str(e), number, source) from e
    if floor is None:
        raise ParseError("world has no floor line", source=source)
    return WorldModel(floor[0], floor[1], tuple(boxes))


def load_world(path: Union[str, Path]) -> WorldModel:
    path = Path(path)
    return parse_world(path.read_text(encoding="utf-8"), str(path))


def collides(world: WorldModel, pose: Pose2D, radius: float) -> bool:
    """True when the body disk overlaps any box footprint"""
    for b in world.boxes:
        nearest_x = min(max(pose.x, b.x), b.x1)
        nearest_y = min(max(pose.y, b.y), b.y1)
        if math.hypot(pose.x - nearest_x, pose.y - nearest_y) < radius:
            return True
    return False


def ray_distance(world: WorldModel, x: float, y: float, angle: float) -> float:
    """Distance along a ground-plane ray to the nearest box footprint (inf if none)"""
    dx, dy = math.cos(angle), math.sin(angle)
    best = math.inf
    for b in world.boxes:
        t_near, t_far = -math.inf, math.inf
        for origin, direction, lo, hi in ((x, dx, b.x, b.x1), (y, dy, b.y, b.y1)):
            if abs(direction) < 1e-12:
                if not lo <= origin <= hi:
                    break
                continue
            t0, t1 = (lo - origin) / direction, (hi - origin) / direction
            t_near, t_far = max(t_near, min(t0, t1)), min(t_far, max(t0, t1))
        else:
            if t_near <= t_far and t_far >= 0:
                best = min(best, max(0.0, t_near))
    return best

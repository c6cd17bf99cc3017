"""
Planar Pose
Ground-plane robot pose shared by the simulator, mapping and registration
"""

import math
from dataclasses import dataclass


def normalize_angle(theta: float) -> float:
    """Wrap an angle to (-pi, pi]"""
    wrapped = math.fmod(theta, 2.0 * math.pi)
    if wrapped <= -math.pi:
        wrapped += 2.0 * math.pi
    elif wrapped > math.pi:
        wrapped -= 2.0 * math.pi
    return wrapped


@dataclass(frozen=True)
class Pose2D:
    """x, y in meters; theta in radians, normalized"""
    x: float = 0.0
    y: float = 0.0
    theta: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "theta", normalize_angle(self.theta))

    @classmethod
    def parse(cls, text: str) -> "Pose2D":
        """Parse 'x,y,theta'"""
        parts = [float(p) for p in text.split(",")]
        if len(parts) != 3:
            raise ValueError(f"pose needs x,y,theta, got {text!r}")
        return cls(*parts)

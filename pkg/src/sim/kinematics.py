"""
Kinematics
Ideal differential-drive motion with exact arc integration
"""

import math
from dataclasses import dataclass, field

from src.errors import InvariantViolation, ParamsInvalid
from src.geometry.pose import Pose2D
from src.sim.params import V_MAX

STRAIGHT_EPSILON = 1e-9


@dataclass(frozen=True)
class RobotState:
    pose: Pose2D = field(default_factory=Pose2D)
    v_left: float = 0.0
    v_right: float = 0.0

    def __post_init__(self):
        if abs(self.v_left) > V_MAX + 1e-12 or abs(self.v_right) > V_MAX + 1e-12:
            raise InvariantViolation(f"wheel speeds must stay within {V_MAX} m/s")

    def with_speeds(self, v_left: float, v_right: float) -> "RobotState":
        return RobotState(self.pose, v_left, v_right)


def clamp_speed(v: float) -> float:
    return max(-V_MAX, min(V_MAX, v))


def step_kinematics(s: RobotState, dt: float, track_width: float) -> RobotState:
    """Advance the pose by dt with the current wheel speeds"""
    if not dt > 0:
        raise ParamsInvalid("dt must be positive")
    v = 0.5 * (s.v_left + s.v_right)
    omega = (s.v_right - s.v_left) / track_width
    x, y, theta = s.pose.x, s.pose.y, s.pose.theta

    if abs(omega) < STRAIGHT_EPSILON:
        x += v * dt * math.cos(theta)
        y += v * dt * math.sin(theta)
    else:
        turned = theta + omega * dt
        x += v / omega * (math.sin(turned) - math.sin(theta))
        y -= v / omega * (math.cos(turned) - math.cos(theta))
        theta = turned
    return RobotState(Pose2D(x, y, theta), s.v_left, s.v_right)

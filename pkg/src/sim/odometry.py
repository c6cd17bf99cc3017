"""
Odometry
Dead reckoning from encoder pulses along the compass heading
"""

import math

from src.geometry.pose import Pose2D, normalize_angle
from src.sim.sensors import EncoderModel


class Odometry:
    """Odometric pose used to register maps and clouds"""

    def __init__(self, start: Pose2D, encoders: EncoderModel):
        self._pose = start
        self._encoders = encoders

    @property
    def pose(self) -> Pose2D:
        return self._pose

    def update(self, left_pulses: int, right_pulses: int, heading: float) -> Pose2D:
        """Advance by the mean wheel travel along the mid-interval heading"""
        distance = 0.5 * (left_pulses + right_pulses) * self._encoders.meters_per_pulse
        previous = self._pose.theta
        mid = previous + 0.5 * normalize_angle(heading - previous)
        self._pose = Pose2D(
            self._pose.x + distance * math.cos(mid),
            self._pose.y + distance * math.sin(mid),
            heading,
        )
        return self._pose

"""
Simulation Parameters
Platform, controller and loop settings of the simulated rover
"""

import math
from dataclasses import dataclass

from src.errors import ParamsInvalid
from src.geometry.pose import Pose2D

V_MAX = 0.20  # m/s, platform top speed


@dataclass(frozen=True)
class SimParams:
    seed: int = 0
    duration: float = 30.0
    tick: float = 0.2
    substep: float = 0.01
    cruise_speed: float = 0.20
    turn_speed: float = 0.10
    track_width: float = 0.14
    wheel_radius: float = 0.03
    pulses_per_rev: int = 400
    robot_radius: float = 0.08
    camera_height: float = 0.25
    start_x: float = 0.5
    start_y: float = 0.5
    start_theta: float = 0.0
    compass_noise: float = 0.0
    kp: float = 2.0
    ki: float = 0.1
    kd: float = 0.05
    integral_limit: float = 0.5
    output_limit: float = 0.2
    stop_threshold: float = 0.25
    ultrasound_max_range: float = 3.0
    stop_recovery_ticks: int = 2
    cloud_every: int = 5

    def __post_init__(self):
        positive = ("duration", "tick", "substep", "track_width", "wheel_radius",
                    "robot_radius", "camera_height", "stop_threshold", "ultrasound_max_range")
        for name in positive:
            if not getattr(self, name) > 0:
                raise ParamsInvalid(f"sim.{name} must be positive")
        if self.substep > self.tick:
            raise ParamsInvalid("sim.substep must not exceed sim.tick")
        if not 0 < self.cruise_speed <= V_MAX or not 0 < self.turn_speed <= V_MAX:
            raise ParamsInvalid(f"wheel speeds must lie in (0, {V_MAX}] m/s")
        if self.pulses_per_rev < 1 or self.stop_recovery_ticks < 1 or self.cloud_every < 1:
            raise ParamsInvalid("pulse, recovery and cloud counts must be at least 1")
        if self.compass_noise < 0 or self.integral_limit < 0 or self.output_limit < 0:
            raise ParamsInvalid("noise and controller limits must be non-negative")
        if self.stop_threshold > self.ultrasound_max_range:
            raise ParamsInvalid("stop threshold must lie within the ultrasound range")

    @property
    def substeps(self) -> int:
        """Kinematic substeps per control tick"""
        return max(1, int(round(self.tick / self.substep)))

    @property
    def ticks(self) -> int:
        return int(math.floor(self.duration / self.tick + 1e-9))

    @property
    def start_pose(self) -> Pose2D:
        return Pose2D(self.start_x, self.start_y, self.start_theta)

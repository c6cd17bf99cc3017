"""
Sensors
Quantizing wheel encoders, the noisy compass and the three forward ultrasound rangers
"""

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from src.geometry.pose import normalize_angle
from src.mapping.occupancy import DEFAULT_SENSOR_ANGLES, MAX_RANGE
from src.sim.kinematics import RobotState
from src.sim.world import WorldModel, ray_distance

PULSE_EPSILON = 1e-9


@dataclass
class EncoderModel:
    """Pulse counters of both encoder wheels; fractional pulses carry over"""
    pulses_per_rev: int = 400
    wheel_radius: float = 0.03
    left_pulses: int = 0
    right_pulses: int = 0
    left_residual: float = 0.0
    right_residual: float = 0.0

    @property
    def meters_per_pulse(self) -> float:
        return 2.0 * math.pi * self.wheel_radius / self.pulses_per_rev

    @property
    def degrees_per_pulse(self) -> float:
        return 360.0 / self.pulses_per_rev


def read_encoders(e: EncoderModel, rotation: float, side: str = "left") -> int:
    """Pulse delta for a wheel rotation (radians); updates the side's counter"""
    residual = e.left_residual if side == "left" else e.right_residual
    total = residual + rotation / (2.0 * math.pi) * e.pulses_per_rev
    delta = math.floor(total + PULSE_EPSILON)
    residual = total - delta
    if side == "left":
        e.left_residual, e.left_pulses = residual, e.left_pulses + delta
    else:
        e.right_residual, e.right_pulses = residual, e.right_pulses + delta
    return delta


def read_compass(s: RobotState, noise_sigma: float, rng: np.random.Generator) -> float:
    """Heading with additive Gaussian noise, normalized"""
    if noise_sigma <= 0:
        return s.pose.theta
    return normalize_angle(s.pose.theta + rng.normal(0.0, noise_sigma))


@dataclass(frozen=True)
class UltrasoundModel:
    angles: Tuple[float, ...] = DEFAULT_SENSOR_ANGLES
    max_range: float = 3.0
    stop_threshold: float = 0.25


def read_ultrasound(world: WorldModel, s: RobotState,
                    m: UltrasoundModel) -> Tuple[float, float, float]:
    """Range per sensor from the robot centre; MAX_RANGE beyond the sensor limit"""
    ranges = []
    for angle in m.angles:
        d = ray_distance(world, s.pose.x, s.pose.y, s.pose.theta + angle)
        ranges.append(d if d <= m.max_range else MAX_RANGE)
    return tuple(ranges)

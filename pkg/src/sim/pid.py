"""
PID Controller
Heading controller producing a differential wheel-speed command
"""

from dataclasses import dataclass
from typing import Optional, Tuple

from src.errors import ParamsInvalid


@dataclass
class PidController:
    kp: float = 2.0
    ki: float = 0.1
    kd: float = 0.05
    integral_limit: float = 0.5
    output_limit: float = 0.2
    integral: float = 0.0
    previous_error: Optional[float] = None

    def reset(self) -> None:
        self.integral = 0.0
        self.previous_error = None


def _clamp(value: float, limit: float) -> float:
    return max(-limit, min(limit, value))


def pid_update(c: PidController, heading_error: float, dt: float) -> float:
    """u = kp*e + ki*int(e) + kd*de/dt with anti-windup and output clamps.

    The derivative term is zero on the first update after a reset.
    """
    if not dt > 0:
        raise ParamsInvalid("dt must be positive")
    c.integral = _clamp(c.integral + heading_error * dt, c.integral_limit)
    derivative = 0.0 if c.previous_error is None else (heading_error - c.previous_error) / dt
    c.previous_error = heading_error
    u = c.kp * heading_error + c.ki * c.integral + c.kd * derivative
    return _clamp(u, c.output_limit)


def split_command(v: float, u: float) -> Tuple[float, float]:
    """(v_left, v_right) for forward speed v and differential command u"""
    return v - 0.5 * u, v + 0.5 * u

"""
Navigator
Vision/ultrasound arbitration and the closed-loop simulation of the rover
"""

import csv
import math
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.config.config_manager import RunConfig
from src.errors import StereoNavError
from src.geometry.camera import StereoRig
from src.geometry.pose import Pose2D, normalize_angle
from src.geometry.reprojection import build_reprojection_matrix
from src.logging.logger import AppLogger
from src.mapping.occupancy import (
    OccupancyGrid, UltrasoundReading, export_map, integrate_reading
)
from src.mapping.readings import write_readings_csv
from src.obstacle.detector import Decision, detect
from src.reconstruction.ply import write_ply
from src.reconstruction.pointcloud import (
    PointCloud, cloud_from_disparity, merge_clouds, register_frame
)
from src.render.renderer import RenderOutput, Scene, render_stereo
from src.resources.files import atomic_write
from src.sim.kinematics import RobotState, clamp_speed, step_kinematics
from src.sim.odometry import Odometry
from src.sim.pid import PidController, pid_update, split_command
from src.sim.sensors import (
    EncoderModel, UltrasoundModel, read_compass, read_encoders, read_ultrasound
)
from src.sim.world import WorldModel, collides
from src.stereo.images import DisparityMap
from src.stereo.matcher import compute_disparity

QUARTER_TURN = math.pi / 2.0
POSE_HEADER = ["t", "x", "y", "theta", "decision"]


class NavState(Enum):
    """Motion mode between control ticks"""
    CRUISE = "Cruise"
    TURNING = "Turning"      # TurnLeft/TurnRight episode, ends on Forward or budget
    ROTATING = "Rotating"    # committed quarter turn (Turn90 or stop recovery)


def arbitrate(ultra: Sequence[float], vision: Decision, m: UltrasoundModel) -> Decision:
    """Any range strictly below the stop threshold wins over vision"""
    if any(r < m.stop_threshold for r in ultra):
        return Decision.STOP
    return vision


@dataclass(frozen=True)
class TickLog:
    """One control tick; vision is None while a committed rotation runs blind"""
    t: float
    pose: Pose2D
    odom_pose: Pose2D
    vision: Optional[Decision]
    decision: Decision
    ranges: Tuple[float, float, float]


@dataclass
class SimulationResult:
    """Everything one run produced, in tick order"""
    ticks: List[TickLog] = field(default_factory=list)
    readings: List[UltrasoundReading] = field(default_factory=list)
    clouds: List[PointCloud] = field(default_factory=list)
    grid: Optional[OccupancyGrid] = None
    collisions: int = 0

    @property
    def decisions(self) -> Dict[str, int]:
        return dict(Counter(str(log.decision) for log in self.ticks))

    def pose_rows(self) -> List[List[str]]:
        return [
            [f"{log.t:.3f}", f"{log.pose.x:.6f}", f"{log.pose.y:.6f}",
             f"{log.pose.theta:.6f}", str(log.decision)]
            for log in self.ticks
        ]


class Simulator:
    """Deterministic control loop: sense, decide, drive, map"""

    def __init__(self, world: WorldModel, rig: StereoRig, cfg: RunConfig,
                 logger: Optional[AppLogger] = None):
        self.world = world
        self.rig = rig
        self.cfg = cfg
        self.logger = logger
        sim = cfg.sim

        self.state = RobotState(sim.start_pose)
        self.encoders = EncoderModel(sim.pulses_per_rev, sim.wheel_radius)
        self.odometry = Odometry(sim.start_pose, self.encoders)
        self.pid = PidController(sim.kp, sim.ki, sim.kd, sim.integral_limit, sim.output_limit)
        self.ultrasound = UltrasoundModel(
            max_range=sim.ultrasound_max_range, stop_threshold=sim.stop_threshold
        )
        self.geometry = cfg.sensors
        self.grid = OccupancyGrid(cfg.map)
        self.q = build_reprojection_matrix(rig)
        self._rng = np.random.default_rng(sim.seed)

        self.nav_state = NavState.CRUISE
        self.heading_setpoint = sim.start_theta
        self._turn_sign = 0
        self._turn_target = 0.0
        self._stop_count = 0
        self._recovering = False
        self._tick = 0
        self.result = SimulationResult(grid=self.grid)

    @property
    def turn90_sign(self) -> int:
        return -1 if self.cfg.obstacle.turn90_direction == "right" else 1

    @property
    def t(self) -> float:
        return self._tick * self.cfg.sim.tick

    # Sensing

    def _sense(self, t: float) -> Tuple[float, float, float]:
        ranges = read_ultrasound(self.world, self.state, self.ultrasound)
        pose = self.odometry.pose
        for index, rng in enumerate(ranges):
            if rng <= 0:
                continue
            reading = UltrasoundReading(index, rng, pose, t)
            integrate_reading(self.grid, reading, self.geometry)
            self.result.readings.append(reading)
        return ranges

    def _vision(self) -> Tuple[Decision, Optional[Tuple[RenderOutput, DisparityMap]]]:
        """Decision from one rendered stereo frame; Stop when the frame fails"""
        try:
            scene = Scene(self.world, self.state.pose, self.cfg.sim.camera_height)
            out = render_stereo(scene, self.rig, self.cfg.render)
            dm = compute_disparity(out.left, out.right, self.cfg.matcher)
            _, _, decision = detect(dm, self.rig, self.cfg.obstacle)
        except StereoNavError as e:
            if self.logger:
                self.logger.warning(f"vision frame failed at t={self.t:.1f}s: {e}")
            return Decision.STOP, None
        return decision, (out, dm)

    def _capture_cloud(self, frame: Tuple[RenderOutput, DisparityMap]) -> None:
        out, dm = frame
        pose = self.odometry.pose
        cloud = cloud_from_disparity(dm, out.left_color, self.q, pose)
        self.result.clouds.append(
            register_frame(cloud, pose, self.cfg.sim.camera_height, self.cfg.cloud)
        )

    # Decision handling

    def _begin_rotation(self, state: NavState, sign: int, recovering: bool = False) -> None:
        self.nav_state = state
        self._recovering = recovering
        self._turn_sign = sign
        self._turn_target = normalize_angle(self.odometry.pose.theta + sign * QUARTER_TURN)

    def _resume_cruise(self, heading: float) -> None:
        self.nav_state = NavState.CRUISE
        self._recovering = False
        self.heading_setpoint = heading
        self.pid.reset()

    def _apply(self, decision: Decision) -> bool:
        """Update the motion mode; False means hold still this tick"""
        if decision is Decision.STOP:
            self._stop_count += 1
            if self._stop_count >= self.cfg.sim.stop_recovery_ticks:
                self._stop_count = 0
                self._begin_rotation(NavState.ROTATING, self.turn90_sign, recovering=True)
            return False

        self._stop_count = 0
        if decision is Decision.TURN90:
            self._begin_rotation(NavState.ROTATING, self.turn90_sign)
        elif decision in (Decision.TURN_LEFT, Decision.TURN_RIGHT):
            if self.nav_state is not NavState.TURNING:
                sign = 1 if decision is Decision.TURN_LEFT else -1
                self._begin_rotation(NavState.TURNING, sign)
        elif self.nav_state is NavState.TURNING:
            self._resume_cruise(self.odometry.pose.theta)
        return True

    def _apply_rotating(self, decision: Decision) -> Decision:
        """Stop holds a committed quarter turn.

        A Stop that persists for stop_recovery_ticks hands the turn over to
        recovery, which then rotates in place regardless of ultrasound.
        """
        if decision is Decision.STOP and not self._recovering:
            self._stop_count += 1
            if self._stop_count >= self.cfg.sim.stop_recovery_ticks:
                self._stop_count = 0
                self._recovering = True
            return Decision.STOP
        self._stop_count = 0
        return Decision.TURN90

    # Motion

    def _wheel_speeds(self, heading: float, dt: float) -> Tuple[float, float]:
        sim = self.cfg.sim
        if self.nav_state is NavState.CRUISE:
            u = pid_update(self.pid, normalize_angle(self.heading_setpoint - heading), dt)
            v_left, v_right = split_command(sim.cruise_speed, u)
            return clamp_speed(v_left), clamp_speed(v_right)

        remaining = normalize_angle(self._turn_target - heading)
        step = 2.0 * sim.turn_speed / sim.track_width * dt
        if abs(remaining) <= 1e-9:
            self._resume_cruise(self._turn_target)
            return 0.0, 0.0
        if abs(remaining) < step:
            speed = abs(remaining) * sim.track_width / (2.0 * dt)
        else:
            speed = sim.turn_speed
        sign = self._turn_sign
        return -sign * speed, sign * speed

    def _drive(self, moving: bool) -> None:
        sim = self.cfg.sim
        dt = sim.tick / sim.substeps
        turning = self.nav_state is not NavState.CRUISE
        for _ in range(sim.substeps):
            heading = read_compass(self.state, sim.compass_noise, self._rng)
            # a turn that finishes mid-tick holds still until the next sensing pass
            settled = turning and self.nav_state is NavState.CRUISE
            if moving and not settled:
                v_left, v_right = self._wheel_speeds(heading, dt)
            else:
                v_left, v_right = 0.0, 0.0
            self.state = step_kinematics(self.state.with_speeds(v_left, v_right), dt,
                                         sim.track_width)
            left = read_encoders(self.encoders, v_left * dt / sim.wheel_radius, "left")
            right = read_encoders(self.encoders, v_right * dt / sim.wheel_radius, "right")
            self.odometry.update(left, right,
                                 read_compass(self.state, sim.compass_noise, self._rng))
        if not moving:
            self.state = self.state.with_speeds(0.0, 0.0)

    def control_tick(self) -> TickLog:
        """One 200 ms cycle: sense, see, arbitrate, drive, check contact"""
        t = self.t
        start = self.state.pose
        ranges = self._sense(t)

        frame = None
        if self.nav_state is NavState.ROTATING:
            vision = None
            decision = self._apply_rotating(arbitrate(ranges, Decision.TURN90, self.ultrasound))
            moving = decision is not Decision.STOP
        else:
            vision, frame = self._vision()
            decision = arbitrate(ranges, vision, self.ultrasound)
            moving = self._apply(decision)

        if frame is not None and self._tick % self.cfg.sim.cloud_every == 0:
            self._capture_cloud(frame)

        log = TickLog(t, start, self.odometry.pose, vision, decision, ranges)
        self._drive(moving)
        self._tick += 1

        if self.logger:
            self.logger.log_decision(t, None if vision is None else str(vision), str(decision))
        if collides(self.world, self.state.pose, self.cfg.sim.robot_radius):
            self.result.collisions += 1
            if self.logger:
                self.logger.log_collision(self.t, self.state.pose.x, self.state.pose.y)
        self.result.ticks.append(log)
        return log

    def run(self, ticks: Optional[int] = None) -> SimulationResult:
        for _ in range(self.cfg.sim.ticks if ticks is None else ticks):
            self.control_tick()
        return self.result


def write_pose_log(path: Path, result: SimulationResult) -> None:
    with atomic_write(path) as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(POSE_HEADER)
        writer.writerows(result.pose_rows())


def write_outputs(result: SimulationResult, out_dir: Path) -> Dict[str, Path]:
    """poses.csv, readings.csv, map.pgm (+ map.txt) and cloud.ply"""
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {
        "poses": out_dir / "poses.csv",
        "readings": out_dir / "readings.csv",
        "map": out_dir / "map.pgm",
        "cloud": out_dir / "cloud.ply",
    }
    write_pose_log(paths["poses"], result)
    write_readings_csv(paths["readings"], result.readings)
    paths["map_info"] = export_map(result.grid, paths["map"])
    write_ply(paths["cloud"], merge_clouds(result.clouds))
    return paths


def simulate(world: WorldModel, rig: StereoRig, cfg: RunConfig,
             logger: Optional[AppLogger] = None,
             out_dir: Optional[Path] = None) -> SimulationResult:
    """Run the configured duration and optionally write every output file"""
    result = Simulator(world, rig, cfg, logger).run()
    if out_dir is not None:
        write_outputs(result, out_dir)
    if logger:
        logger.log_summary(len(result.ticks), result.collisions, result.decisions)
    return result

"""
Configuration Manager
Handles loading, saving, validating and accessing run configuration
"""

import copy
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterator, Optional, Tuple

from src.calib.epipolar import RansacConfig
from src.errors import ParseError, StereoNavError, ValidationError
from src.mapping.occupancy import MapParams, SensorGeometry
from src.obstacle.detector import ObstacleParams
from src.reconstruction.pointcloud import CloudFilterParams
from src.render.renderer import RenderParams
from src.resources.files import atomic_write, format_key_values, parse_key_values
from src.sim.params import SimParams
from src.stereo.matcher import MatcherParams


def _flatten(tree: Dict[str, Any], prefix: str = "") -> Iterator[Tuple[str, Any]]:
    """Yield (dotted_key, value) leaves of a nested dict"""
    for key, value in tree.items():
        dotted = f"{prefix}{key}"
        if isinstance(value, dict):
            yield from _flatten(value, dotted + ".")
        else:
            yield dotted, value


def coerce(value: str, like: Any) -> Any:
    """Convert a config string to the type of the default value"""
    if isinstance(like, bool):
        lowered = value.lower()
        if lowered in ("1", "true", "yes", "on"):
            return True
        if lowered in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"not a boolean: {value!r}")
    if isinstance(like, int):
        return int(value)
    if isinstance(like, float):
        return float(value)
    return value


class ConfigManager:
    """Manages run configuration"""

    DEFAULT_CONFIG = {
        "calibration": "",
        "output_dir": "out",
        "log_file": "",
        "matcher": {
            "window": 9,
            "min_disp": 0,
            "max_disp": 64,
            "prefilter_cap": 31,
            "texture_threshold": 10,
            "uniqueness_ratio": 15,
            "workers": 1,
        },
        "obstacle": {
            "z_near": 0.20,
            "z_far": 0.40,
            "min_area": 150,
            "turn90_direction": "right",
        },
        "cloud": {
            "min_cluster": 30,
            "cluster_radius": 0.05,
            "max_range": 5.0,
        },
        "calib": {
            "alignment_threshold_px": 1.0,
            "ransac_iterations": 500,
            "inlier_threshold_px": 1.0,
            "min_inlier_fraction": 0.5,
            "seed": 0,
        },
        "map": {
            "resolution": 0.05,
            "origin_x": -5.0,
            "origin_y": -5.0,
            "width_m": 10.0,
            "height_m": 10.0,
            "cone_deg": 0.0,
        },
        "sim": {
            "seed": 0,
            "duration": 30.0,
            "tick": 0.2,
            "substep": 0.01,
            "cruise_speed": 0.20,
            "turn_speed": 0.10,
            "track_width": 0.14,
            "wheel_radius": 0.03,
            "pulses_per_rev": 400,
            "robot_radius": 0.08,
            "camera_height": 0.25,
            "start_x": 0.5,
            "start_y": 0.5,
            "start_theta": 0.0,
            "compass_noise": 0.0,
            "kp": 2.0,
            "ki": 0.1,
            "kd": 0.05,
            "integral_limit": 0.5,
            "output_limit": 0.2,
            "stop_threshold": 0.25,
            "ultrasound_max_range": 3.0,
            "stop_recovery_ticks": 2,
            "cloud_every": 5,
        },
        "render": {
            "floor_seed": 7,
            "texture_scale": 0.02,
            "noise_sigma": 0.0,
            "seed": 0,
        },
    }

    def __init__(self, config_path: Optional[str] = None):
        self.config_path = Path(config_path) if config_path else None
        self._config: Dict[str, Any] = copy.deepcopy(self.DEFAULT_CONFIG)
        self._defaults = dict(_flatten(self.DEFAULT_CONFIG))

    def load(self) -> bool:
        """Load configuration from file; False when there is no file"""
        if self.config_path is None or not self.config_path.exists():
            return False

        text = self.config_path.read_text(encoding="utf-8")
        source = str(self.config_path)
        for line, key, raw in parse_key_values(text, source):
            if key not in self._defaults:
                raise ParseError(f"unknown key {key!r}", line, source)
            try:
                self.set(key, coerce(raw, self._defaults[key]))
            except ValueError as e:
                raise ParseError(f"bad value for {key}: {e}", line, source) from e
        return True

    def save(self) -> bool:
        """Save configuration to file"""
        if self.config_path is None:
            return False
        with atomic_write(self.config_path) as handle:
            handle.write(format_key_values(list(self.items())))
        return True

    def get(self, key: str, default: Any = None) -> Any:
        """Get configuration value by dot-notation key"""
        keys = key.split('.')
        value = self._config

        for k in keys:
            if isinstance(value, dict):
                value = value.get(k)
            else:
                return default

        return value if value is not None else default

    def set(self, key: str, value: Any) -> None:
        """Set configuration value by dot-notation key"""
        keys = key.split('.')
        config = self._config

        for k in keys[:-1]:
            if k not in config:
                config[k] = {}
            config = config[k]

        config[keys[-1]] = value

    def items(self) -> Iterator[Tuple[str, Any]]:
        """All (dotted_key, value) pairs"""
        return _flatten(self._config)

    @classmethod
    def numeric_keys(cls) -> Iterator[Tuple[str, Any]]:
        """Dotted keys whose defaults are numbers (these get CLI flags)"""
        for key, value in _flatten(cls.DEFAULT_CONFIG):
            if isinstance(value, (int, float)) and not isinstance(value, bool):
                yield key, value

    @property
    def base_dir(self) -> Path:
        """Directory relative paths resolve against"""
        return self.config_path.parent if self.config_path else Path(".")

    def resolve(self, key: str) -> Optional[Path]:
        """Path-valued key resolved against the config directory"""
        value = self.get(key)
        if not value:
            return None
        path = Path(value)
        return path if path.is_absolute() else self.base_dir / path

    def get_log_file(self) -> Optional[Path]:
        """Get log file path"""
        return self.resolve("log_file")

    def get_output_dir(self) -> Path:
        """Get output directory path"""
        return self.resolve("output_dir") or Path("out")


@dataclass
class RunConfig:
    """Validated configuration for one run"""
    calibration: Optional[Path]
    matcher: MatcherParams = field(default_factory=MatcherParams)
    obstacle: ObstacleParams = field(default_factory=ObstacleParams)
    cloud: CloudFilterParams = field(default_factory=CloudFilterParams)
    ransac: RansacConfig = field(default_factory=RansacConfig)
    alignment_threshold_px: float = 1.0
    map: MapParams = field(default_factory=MapParams)
    sensors: SensorGeometry = field(default_factory=SensorGeometry)
    sim: SimParams = field(default_factory=SimParams)
    render: RenderParams = field(default_factory=RenderParams)
    output_dir: Path = Path("out")
    log_file: Optional[Path] = None


def build_run_config(manager: ConfigManager) -> RunConfig:
    """Turn a loaded ConfigManager into a validated RunConfig"""
    g = manager.get
    try:
        calibration = manager.resolve("calibration")
        if calibration is not None and not calibration.exists():
            raise ValidationError("calibration file must exist", str(calibration))
        cfg = RunConfig(
            calibration=calibration,
            matcher=MatcherParams(
                window=g("matcher.window"),
                min_disp=g("matcher.min_disp"),
                max_disp=g("matcher.max_disp"),
                prefilter_cap=g("matcher.prefilter_cap"),
                texture_threshold=g("matcher.texture_threshold"),
                uniqueness_ratio=g("matcher.uniqueness_ratio"),
                workers=g("matcher.workers"),
            ),
            obstacle=ObstacleParams(
                z_near=g("obstacle.z_near"),
                z_far=g("obstacle.z_far"),
                min_area=g("obstacle.min_area"),
                turn90_direction=g("obstacle.turn90_direction"),
            ),
            cloud=CloudFilterParams(
                min_cluster=g("cloud.min_cluster"),
                cluster_radius=g("cloud.cluster_radius"),
                max_range=g("cloud.max_range"),
            ),
            ransac=RansacConfig(
                iterations=g("calib.ransac_iterations"),
                inlier_threshold_px=g("calib.inlier_threshold_px"),
                seed=g("calib.seed"),
                min_inlier_fraction=g("calib.min_inlier_fraction"),
            ),
            alignment_threshold_px=g("calib.alignment_threshold_px"),
            map=MapParams(
                resolution=g("map.resolution"),
                origin_x=g("map.origin_x"),
                origin_y=g("map.origin_y"),
                width_m=g("map.width_m"),
                height_m=g("map.height_m"),
            ),
            sensors=SensorGeometry(
                max_range=g("sim.ultrasound_max_range"),
                cone_deg=g("map.cone_deg"),
            ),
            sim=SimParams(**{k.split(".", 1)[1]: v for k, v in manager.items()
                             if k.startswith("sim.")}),
            render=RenderParams(
                floor_seed=g("render.floor_seed"),
                texture_scale=g("render.texture_scale"),
                noise_sigma=g("render.noise_sigma"),
                seed=g("render.seed"),
            ),
            output_dir=manager.get_output_dir(),
            log_file=manager.get_log_file(),
        )
    except ValidationError:
        raise
    except (StereoNavError, ValueError) as e:
        raise ValidationError(str(e)) from e
    if cfg.alignment_threshold_px <= 0:
        raise ValidationError("alignment threshold must be positive")
    return cfg


def load_config(path: str, overrides: Optional[Dict[str, Any]] = None) -> RunConfig:
    """Parse, default, override and validate a run config file"""
    config_path = Path(path)
    if not config_path.exists():
        raise FileNotFoundError(f"config file not found: {config_path}")
    manager = ConfigManager(str(config_path))
    manager.load()
    for key, value in (overrides or {}).items():
        manager.set(key, value)
    return build_run_config(manager)

"""
Calibration File
Reads and writes the stereo rig key = value calibration file
"""

from pathlib import Path
from typing import Dict, Union

from src.errors import ParseError, StereoNavError, ValidationError
from src.geometry.camera import StereoRig
from src.resources.files import atomic_write, format_key_values, parse_key_values

REQUIRED_KEYS = ("f_px", "cx", "cy", "baseline_m", "width", "height")
OPTIONAL_KEYS = ("right_cx",)
INT_KEYS = ("width", "height")


def parse_calibration(text: str, source: str = "") -> StereoRig:
    """Build a StereoRig from calibration text"""
    values: Dict[str, float] = {}
    for line, key, raw in parse_key_values(text, source):
        if key not in REQUIRED_KEYS + OPTIONAL_KEYS:
            raise ParseError(f"unknown calibration key {key!r}", line, source)
        if key in values:
            raise ParseError(f"duplicate calibration key {key!r}", line, source)
        try:
            values[key] = int(raw) if key in INT_KEYS else float(raw)
        except ValueError as e:
            raise ParseError(f"bad value for {key}: {raw!r}", line, source) from e

    missing = [k for k in REQUIRED_KEYS if k not in values]
    if missing:
        raise ValidationError("calibration keys required", ", ".join(missing))

    try:
        return StereoRig.create(
            f=values["f_px"],
            cx=values["cx"],
            cy=values["cy"],
            right_cx=values.get("right_cx"),
            baseline_m=values["baseline_m"],
            width=values["width"],
            height=values["height"],
        )
    except StereoNavError as e:
        raise ValidationError(str(e)) from e


def load_calibration(path: Union[str, Path]) -> StereoRig:
    """Load a calibration file"""
    path = Path(path)
    return parse_calibration(path.read_text(encoding="utf-8"), str(path))


def save_calibration(path: Union[str, Path], rig: StereoRig) -> None:
    """Write a rig in the calibration format"""
    items = [
        ("f_px", rig.f),
        ("cx", rig.left.cx),
        ("cy", rig.left.cy),
        ("right_cx", rig.right_cx),
        ("baseline_m", rig.baseline_m),
        ("width", rig.width),
        ("height", rig.height),
    ]
    with atomic_write(path) as handle:
        handle.write(format_key_values(items))

"""
Image Types
Grayscale/color images and the fixed-point disparity map
"""

from dataclasses import dataclass

import numpy as np

from src.errors import InvariantViolation

DISP_SCALE = 16  # fixed-point fraction bits: value = disparity * 16
INVALID = 0xFFFF


@dataclass(frozen=True)
class GrayImage:
    """Row-major 8-bit intensities"""
    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data)
        if data.ndim != 2:
            raise InvariantViolation("gray image must be two-dimensional")
        if data.dtype != np.uint8:
            data = np.clip(data, 0, 255).astype(np.uint8)
        object.__setattr__(self, "data", data)

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @classmethod
    def constant(cls, width: int, height: int, level: int) -> "GrayImage":
        return cls(np.full((height, width), level, dtype=np.uint8))


@dataclass(frozen=True)
class ColorImage:
    """Row-major 8-bit RGB"""
    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data)
        if data.ndim != 3 or data.shape[2] != 3:
            raise InvariantViolation("color image must be height x width x 3")
        if data.dtype != np.uint8:
            data = np.clip(data, 0, 255).astype(np.uint8)
        object.__setattr__(self, "data", data)

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    def to_gray(self) -> GrayImage:
        """ITU-R 601 luma, rounded"""
        rgb = self.data.astype(np.float64)
        luma = 0.299 * rgb[..., 0] + 0.587 * rgb[..., 1] + 0.114 * rgb[..., 2]
        return GrayImage(np.rint(luma).astype(np.uint8))


@dataclass(frozen=True)
class DisparityMap:
    """Fixed-point disparities (x16) with the INVALID sentinel"""
    data: np.ndarray
    min_disp: int = 0
    max_disp: int = 64

    def __post_init__(self):
        data = np.asarray(self.data)
        if data.ndim != 2:
            raise InvariantViolation("disparity map must be two-dimensional")
        if data.dtype != np.uint16:
            data = data.astype(np.uint16)
        valid = data != INVALID
        if valid.any():
            lo, hi = self.min_disp * DISP_SCALE, self.max_disp * DISP_SCALE
            values = data[valid]
            if values.min() < lo or values.max() > hi:
                raise InvariantViolation(
                    f"disparities must lie in [{self.min_disp}, {self.max_disp}]"
                )
        object.__setattr__(self, "data", data)

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @classmethod
    def invalid(cls, width: int, height: int, min_disp: int = 0,
                max_disp: int = 64) -> "DisparityMap":
        return cls(np.full((height, width), INVALID, dtype=np.uint16), min_disp, max_disp)

    @classmethod
    def from_pixels(cls, disparity: np.ndarray, min_disp: int = 0,
                    max_disp: int = 64) -> "DisparityMap":
        """Quantize float disparities; NaN and out-of-range become INVALID"""
        disparity = np.asarray(disparity, dtype=np.float64)
        fixed = np.full(disparity.shape, INVALID, dtype=np.uint16)
        with np.errstate(invalid="ignore"):
            ok = (np.isfinite(disparity) & (disparity >= min_disp)
                  & (disparity <= max_disp))
        fixed[ok] = np.rint(disparity[ok] * DISP_SCALE).astype(np.uint16)
        return cls(fixed, min_disp, max_disp)

    def valid_mask(self) -> np.ndarray:
        return self.data != INVALID

    def to_pixels(self) -> np.ndarray:
        """Float disparities in pixels, NaN where INVALID"""
        out = self.data.astype(np.float64) / DISP_SCALE
        out[~self.valid_mask()] = np.nan
        return out

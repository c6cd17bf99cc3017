"""
Image I/O
Reads and writes PGM/PPM images and 16-bit disparity maps through Pillow
"""

from pathlib import Path
from typing import Union

import numpy as np
from PIL import Image

from src.errors import ParseError
from src.resources.files import atomic_write
from src.stereo.images import ColorImage, DisparityMap, GrayImage

PathLike = Union[str, Path]

# Largest disparity that fits the x16 fixed point below the sentinel
MAX_STORABLE_DISP = 4095


def _save(image: Image.Image, path: PathLike) -> None:
    """Save through a temp file so readers never see a partial image"""
    with atomic_write(path, "wb") as handle:
        image.save(handle, format="PPM")


def read_gray(path: PathLike) -> GrayImage:
    """Load an 8-bit grayscale image (PGM or anything Pillow opens)"""
    with Image.open(path) as img:
        if img.mode != "L":
            img = img.convert("L")
        return GrayImage(np.asarray(img, dtype=np.uint8).copy())


def write_gray(path: PathLike, image: GrayImage) -> None:
    """Write a binary P5 PGM"""
    _save(Image.fromarray(image.data), path)


def read_color(path: PathLike) -> ColorImage:
    """Load an RGB image (PPM or anything Pillow opens)"""
    with Image.open(path) as img:
        if img.mode != "RGB":
            img = img.convert("RGB")
        return ColorImage(np.asarray(img, dtype=np.uint8).copy())


def write_color(path: PathLike, image: ColorImage) -> None:
    """Write a binary P6 PPM"""
    _save(Image.fromarray(image.data), path)


def write_disparity(path: PathLike, dm: DisparityMap) -> None:
    """Write a 16-bit big-endian P5 PGM (maxval 65535) of the x16 values"""
    _save(Image.fromarray(dm.data.astype(np.int32)), path)


def read_disparity(path: PathLike, min_disp: int = 0,
                   max_disp: int = MAX_STORABLE_DISP) -> DisparityMap:
    """Load a disparity map written by write_disparity"""
    with Image.open(path) as img:
        data = np.asarray(img)
    if data.ndim != 2:
        raise ParseError("disparity file must be single-channel", source=str(path))
    return DisparityMap(data.astype(np.uint16), min_disp, max_disp)


def write_mask(path: PathLike, mask: np.ndarray) -> None:
    """Write a boolean mask as a 0/255 PGM"""
    _save(Image.fromarray(np.where(mask, 255, 0).astype(np.uint8)), path)

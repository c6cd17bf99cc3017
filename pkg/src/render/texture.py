"""
Procedural Texture
Seeded hash-based value noise summed over octaves
"""

from typing import Union

import numpy as np

OCTAVES = 3
GOLDEN = np.uint64(0x9E3779B97F4A7C15)
MIX_1 = np.uint64(0xBF58476D1CE4E5B9)
MIX_2 = np.uint64(0x94D049BB133111EB)
OCTAVE_SALT = np.uint64(0x632BE59BD9B4E019)

ArrayLike = Union[float, np.ndarray]


def _mix(z: np.ndarray) -> np.ndarray:
    """splitmix64 finalizer on uint64 arrays"""
    z = (z ^ (z >> np.uint64(30))) * MIX_1
    z = (z ^ (z >> np.uint64(27))) * MIX_2
    return z ^ (z >> np.uint64(31))


def lattice_value(seed: int, i: np.ndarray, j: np.ndarray) -> np.ndarray:
    """Uniform [0, 1) value per integer lattice point"""
    with np.errstate(over="ignore"):
        s = np.asarray([seed], dtype=np.int64).view(np.uint64)[0]
        ii = np.atleast_1d(np.asarray(i, dtype=np.int64)).view(np.uint64)
        jj = np.atleast_1d(np.asarray(j, dtype=np.int64)).view(np.uint64)
        z = _mix(s * GOLDEN + ii)
        z = _mix(z ^ (jj * MIX_1 + GOLDEN))
    return (z >> np.uint64(11)).astype(np.float64) * (1.0 / (1 << 53))


def _smoothstep(t: np.ndarray) -> np.ndarray:
    return t * t * (3.0 - 2.0 * t)


def value_noise(seed: int, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Bilinear-smoothstep interpolation of lattice values, in [0, 1)"""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    shape = np.broadcast(u, v).shape
    u, v = np.broadcast_to(u, shape).ravel(), np.broadcast_to(v, shape).ravel()
    i0, j0 = np.floor(u), np.floor(v)
    fu, fv = _smoothstep(u - i0), _smoothstep(v - j0)
    i0, j0 = i0.astype(np.int64), j0.astype(np.int64)

    c00 = lattice_value(seed, i0, j0)
    c10 = lattice_value(seed, i0 + 1, j0)
    c01 = lattice_value(seed, i0, j0 + 1)
    c11 = lattice_value(seed, i0 + 1, j0 + 1)
    top = c00 + fu * (c10 - c00)
    bottom = c01 + fu * (c11 - c01)
    return (top + fv * (bottom - top)).reshape(shape)


def _octave_seed(seed: int, octave: int) -> int:
    with np.errstate(over="ignore"):
        s = np.asarray([seed], dtype=np.int64).view(np.uint64)
        mixed = _mix(s + OCTAVE_SALT * np.uint64(octave + 1))
    return int(mixed.view(np.int64)[0])


def _fade(cells_per_pixel: ArrayLike) -> ArrayLike:
    """1 while an octave cell spans a pixel or more, 0 from two cells per pixel"""
    return np.clip(2.0 - np.asarray(cells_per_pixel, dtype=np.float64), 0.0, 1.0)


def procedural_texture(seed: int, u: ArrayLike, v: ArrayLike,
                       footprint: ArrayLike = 0.0) -> np.ndarray:
    """Intensity in [0, 255] at texture coordinates (u, v), one unit per base cell.

    Three octaves of value noise, each at twice the frequency and half the
    amplitude of the previous one, stretched to full contrast. `footprint` is
    the pixel size in base cells; octaves finer than a pixel fade to mid grey
    so point sampling does not alias distant surfaces into noise.
    """
    total = 0.0
    weight = 0.0
    for octave in range(OCTAVES):
        scale = float(1 << octave)
        amplitude = 1.0 / scale
        fade = _fade(np.asarray(footprint) * scale)
        noise = value_noise(
            _octave_seed(seed, octave), np.asarray(u) * scale, np.asarray(v) * scale
        )
        total = total + amplitude * (fade * noise + (1.0 - fade) * 0.5)
        weight += amplitude
    normalized = total / weight
    return np.clip(128.0 + (normalized - 0.5) * 2.5 * 255.0, 0.0, 255.0)

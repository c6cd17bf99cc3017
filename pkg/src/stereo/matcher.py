"""
Block Matcher
Prefilter, horizontal SAD block search inside the horopter, and post-filtering
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
from scipy import ndimage

from src.errors import ParamsInvalid, SizeMismatch
from src.geometry.camera import StereoRig
from src.stereo.images import DISP_SCALE, INVALID, DisparityMap, GrayImage

PREFILTER_CENTER = 128
_NO_COST = np.iinfo(np.int32).max


@dataclass(frozen=True)
class MatcherParams:
    """Block matcher settings; min_disp..max_disp is the horopter"""
    window: int = 9
    min_disp: int = 0
    max_disp: int = 64
    prefilter_cap: int = 31
    texture_threshold: int = 10
    uniqueness_ratio: int = 15
    workers: int = 1

    def __post_init__(self):
        if self.window < 3 or self.window % 2 == 0:
            raise ParamsInvalid(f"window must be odd and >= 3, got {self.window}")
        if not 0 <= self.min_disp < self.max_disp:
            raise ParamsInvalid("disparity range needs 0 <= min_disp < max_disp")
        if not 1 <= self.prefilter_cap <= 127:
            raise ParamsInvalid("prefilter_cap must lie in [1, 127]")
        if self.texture_threshold < 0 or self.uniqueness_ratio < 0:
            raise ParamsInvalid("post-filter thresholds must be non-negative")
        if self.workers < 1:
            raise ParamsInvalid("workers must be at least 1")

    @property
    def half(self) -> int:
        return self.window // 2

    @property
    def num_disparities(self) -> int:
        return self.max_disp - self.min_disp + 1

    def check_width(self, width: int) -> None:
        if self.max_disp >= width:
            raise ParamsInvalid(f"max_disp {self.max_disp} must be below image width {width}")

    def support_columns(self, width: int) -> Tuple[int, int]:
        """[x_lo, x_hi) of pixels whose window fits at every disparity"""
        return self.max_disp + self.half, width - self.half


def prefilter(img: GrayImage, cap: int = 31) -> GrayImage:
    """Clamped horizontal gradient centred on 128.

    Constant regions map to exactly 128 and a brightness offset cancels.
    """
    src = img.data.astype(np.int32)
    grad = ndimage.correlate1d(src, [-1, 0, 1], axis=1, mode="nearest", output=np.int32)
    return GrayImage((np.clip(grad, -cap, cap) + PREFILTER_CENTER).astype(np.uint8))


def postfilter(costs: np.ndarray, texture: int, p: MatcherParams) -> bool:
    """Keep-or-invalid for one pixel's full cost curve over the horopter"""
    if texture < p.texture_threshold:
        return False
    costs = np.asarray(costs, dtype=np.int64)
    best_k = int(np.argmin(costs))
    best = costs[best_k]
    far = np.abs(np.arange(costs.size) - best_k) > 1
    rivals = costs[far] * 100 <= best * (100 + p.uniqueness_ratio)
    return not rivals.any()


def _refine(costs: np.ndarray, best_k: int, p: MatcherParams) -> int:
    """Fixed-point disparity with parabolic subpixel refinement"""
    value = (p.min_disp + best_k) * DISP_SCALE
    c0 = int(costs[best_k])
    if best_k == 0 or best_k == costs.size - 1 or c0 == 0:
        return value
    cm, cp = int(costs[best_k - 1]), int(costs[best_k + 1])
    den = cm + cp - 2 * c0
    if den <= 0:
        return value
    offset = (DISP_SCALE * (cm - cp) + den) // (2 * den)
    return value + max(-DISP_SCALE // 2, min(DISP_SCALE // 2, offset))


def _box_sum(values: np.ndarray, window: int) -> np.ndarray:
    """Sum over every full window x window block (valid region only)"""
    rows = np.zeros((values.shape[0] + 1, values.shape[1]), dtype=np.int32)
    np.cumsum(values, axis=0, dtype=np.int32, out=rows[1:])
    vertical = rows[window:] - rows[:-window]
    cols = np.zeros((vertical.shape[0], vertical.shape[1] + 1), dtype=np.int32)
    np.cumsum(vertical, axis=1, dtype=np.int32, out=cols[:, 1:])
    return cols[:, window:] - cols[:, :-window]


def _match_band(left: np.ndarray, right: np.ndarray, rows: Tuple[int, int],
                p: MatcherParams) -> np.ndarray:
    """Disparities for output rows [r0, r1); columns outside support are INVALID.

    The cost curve is streamed one disparity at a time. Per pixel only the
    winner, its two neighbours and the cheapest rival at least two steps
    away from the winner are kept.
    """
    r0, r1 = rows
    h = p.half
    width = left.shape[1]
    x_lo, x_hi = p.support_columns(width)
    out = np.full((r1 - r0, width), INVALID, dtype=np.uint16)
    if r1 <= r0 or x_hi <= x_lo:
        return out

    lb = left[r0 - h:r1 + h]
    rb = right[r0 - h:r1 + h]
    c_lo, c_hi = x_lo - h, x_hi + h
    n_disp = p.num_disparities
    left_cols = lb[:, c_lo:c_hi]

    shape = (r1 - r0, x_hi - x_lo)
    best = np.full(shape, _NO_COST, dtype=np.int32)
    best_k = np.zeros(shape, dtype=np.int32)
    rival = np.full(shape, _NO_COST, dtype=np.int32)
    cm = np.full(shape, _NO_COST, dtype=np.int32)
    cp = np.full(shape, _NO_COST, dtype=np.int32)
    behind = np.full(shape, _NO_COST, dtype=np.int32)   # min cost over k' <= k - 2
    prev = np.full(shape, _NO_COST, dtype=np.int32)     # cost at k - 1

    for k in range(n_disp):
        d = p.min_disp + k
        cost = _box_sum(np.abs(left_cols - rb[:, c_lo - d:c_hi - d]), p.window)
        won = cost < best
        # winners overwrite cp and rival below
        np.copyto(cp, cost, where=best_k == k - 1)
        np.minimum(rival, cost, out=rival, where=best_k <= k - 2)
        np.minimum(best, cost, out=best)
        np.copyto(best_k, k, where=won)
        np.copyto(rival, behind, where=won)
        np.copyto(cm, prev, where=won)
        np.minimum(behind, prev, out=behind)
        prev = cost

    texture = _box_sum(np.abs(left_cols - PREFILTER_CENTER), p.window)
    best = best.astype(np.int64)
    ambiguous = rival.astype(np.int64) * 100 <= best * (100 + p.uniqueness_ratio)
    keep = (texture >= p.texture_threshold) & ~ambiguous

    value = (p.min_disp + best_k.astype(np.int64)) * DISP_SCALE
    interior = (best_k > 0) & (best_k < n_disp - 1) & (best > 0)
    cm = np.where(interior, cm, 0).astype(np.int64)
    cp = np.where(interior, cp, 0).astype(np.int64)
    den = cm + cp - 2 * best
    refine = interior & (den > 0)
    safe_den = np.where(refine, den, 1)
    offset = (DISP_SCALE * (cm - cp) + safe_den) // (2 * safe_den)
    offset = np.clip(offset, -DISP_SCALE // 2, DISP_SCALE // 2)
    value = np.where(refine, value + offset, value)

    out[:, x_lo:x_hi] = np.where(keep, value, INVALID).astype(np.uint16)
    return out


def _row_bands(height: int, half: int, count: int) -> List[Tuple[int, int]]:
    """Split the supported rows [half, height - half) into contiguous bands"""
    first, last = half, height - half
    if last <= first:
        return []
    edges = np.linspace(first, last, min(count, last - first) + 1).round().astype(int)
    return [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]


def _validate(left: GrayImage, right: GrayImage, p: MatcherParams) -> None:
    if left.data.shape != right.data.shape:
        raise SizeMismatch(f"left {left.data.shape} and right {right.data.shape} differ")
    p.check_width(left.width)


def match_sad(left: GrayImage, right: GrayImage, p: MatcherParams,
              workers: Optional[int] = None) -> DisparityMap:
    """Dense SAD block matching of prefiltered images.

    Rows are processed in independent bands, so the result does not depend
    on the number of workers.
    """
    _validate(left, right, p)
    workers = workers or p.workers
    lft = left.data.astype(np.int32)
    rgt = right.data.astype(np.int32)
    out = np.full(lft.shape, INVALID, dtype=np.uint16)

    bands = _row_bands(left.height, p.half, workers)
    if workers > 1 and len(bands) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda rows: _match_band(lft, rgt, rows, p), bands))
    else:
        results = [_match_band(lft, rgt, rows, p) for rows in bands]

    for (r0, r1), band in zip(bands, results):
        out[r0:r1] = band
    return DisparityMap(out, p.min_disp, p.max_disp)


def brute_force_match(left: GrayImage, right: GrayImage, p: MatcherParams) -> DisparityMap:
    """Reference matcher: literal per-pixel, per-disparity window sums"""
    _validate(left, right, p)
    lft = left.data.astype(np.int64)
    rgt = right.data.astype(np.int64)
    h = p.half
    height, width = lft.shape
    x_lo, x_hi = p.support_columns(width)
    out = np.full(lft.shape, INVALID, dtype=np.uint16)

    for y in range(h, height - h):
        for x in range(x_lo, x_hi):
            block = lft[y - h:y + h + 1, x - h:x + h + 1]
            costs = np.array([
                np.abs(block - rgt[y - h:y + h + 1, x - d - h:x - d + h + 1]).sum()
                for d in range(p.min_disp, p.max_disp + 1)
            ])
            texture = int(np.abs(block - PREFILTER_CENTER).sum())
            if postfilter(costs, texture, p):
                out[y, x] = _refine(costs, int(np.argmin(costs)), p)
    return DisparityMap(out, p.min_disp, p.max_disp)


def compute_disparity(left: GrayImage, right: GrayImage, p: MatcherParams) -> DisparityMap:
    """Prefilter both images, then match"""
    return match_sad(prefilter(left, p.prefilter_cap), prefilter(right, p.prefilter_cap), p)


def disparity_to_gray(dm: DisparityMap) -> GrayImage:
    """Map [min_disp, max_disp] linearly to [1, 255]; INVALID -> 0"""
    span = dm.max_disp - dm.min_disp
    d = dm.data.astype(np.float64) / DISP_SCALE
    levels = 1 + np.rint((d - dm.min_disp) / span * 254.0)
    gray = np.where(dm.valid_mask(), np.clip(levels, 1, 255), 0)
    return GrayImage(gray.astype(np.uint8))


def disparity_to_depth(dm: DisparityMap, rig: StereoRig) -> np.ndarray:
    """Per-pixel depth in meters; NaN where INVALID or non-positive"""
    d = dm.to_pixels() - (rig.left.cx - rig.right_cx)
    with np.errstate(divide="ignore", invalid="ignore"):
        depth = rig.f * rig.baseline_m / d
    depth[~(d > 0)] = np.nan
    return depth

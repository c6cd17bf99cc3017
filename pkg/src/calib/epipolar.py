"""
Epipolar Calibration
Fundamental matrix by normalized 8-point inside RANSAC, essential matrix, alignment check
"""

from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from src.errors import (
    ConsensusTooSmall, DegenerateConfiguration, DegenerateLine, EmptyInput,
    InvariantViolation, ParamsInvalid, TooFewCorrespondences
)
from src.geometry.camera import CameraIntrinsics, PixelCoord

MIN_CORRESPONDENCES = 8
RANK_TOLERANCE = 1e-12
DEFAULT_ALIGNMENT_THRESHOLD_PX = 1.0


@dataclass(frozen=True)
class Correspondence:
    """One matched pixel pair, left image then right image"""
    left: PixelCoord
    right: PixelCoord

    @classmethod
    def from_xy(cls, xl: float, yl: float, xr: float, yr: float) -> "Correspondence":
        return cls(PixelCoord(xl, yl), PixelCoord(xr, yr))

    def inside(self, width: int, height: int) -> bool:
        """True when both points lie within a width x height image"""
        return all(0 <= p.x < width and 0 <= p.y < height for p in (self.left, self.right))


@dataclass(frozen=True)
class FundamentalMatrix:
    """3x3 epipolar constraint x'^T F x = 0 in pixel coordinates"""
    m: np.ndarray

    def __post_init__(self):
        m = np.array(self.m, dtype=np.float64)
        if m.shape != (3, 3):
            raise InvariantViolation("fundamental matrix must be 3x3")
        m.setflags(write=False)
        object.__setattr__(self, "m", m)

    def validate(self) -> "FundamentalMatrix":
        """Raise InvariantViolation unless F is rank 2 with unit Frobenius norm"""
        norm = np.linalg.norm(self.m)
        if not np.isclose(norm, 1.0, atol=1e-9):
            raise InvariantViolation(f"fundamental matrix norm is {norm:.3g}, expected 1")
        s = np.linalg.svd(self.m, compute_uv=False)
        if s[1] <= RANK_TOLERANCE or s[2] > 1e-9 * s[0]:
            raise InvariantViolation("fundamental matrix must have rank 2")
        return self


@dataclass(frozen=True)
class EssentialMatrix:
    """Calibrated counterpart of F, singular values (s, s, 0)"""
    m: np.ndarray

    def __post_init__(self):
        m = np.array(self.m, dtype=np.float64)
        m.setflags(write=False)
        object.__setattr__(self, "m", m)

    @property
    def singular_values(self) -> np.ndarray:
        return np.linalg.svd(self.m, compute_uv=False)


@dataclass(frozen=True)
class RansacConfig:
    iterations: int = 500
    inlier_threshold_px: float = 1.0
    seed: int = 0
    min_inlier_fraction: float = 0.5

    def __post_init__(self):
        if self.iterations < 1:
            raise ParamsInvalid("RANSAC needs at least one iteration")
        if not self.inlier_threshold_px > 0:
            raise ParamsInvalid("inlier threshold must be positive")
        if not 0.0 <= self.min_inlier_fraction <= 1.0:
            raise ParamsInvalid("min_inlier_fraction must lie in [0, 1]")


@dataclass(frozen=True)
class AlignmentReport:
    """Vertical disparity statistics of a correspondence set"""
    mean_px: float
    max_px: float
    passed: bool

    def __str__(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return f"mean |dy| = {self.mean_px:.3f} px, max |dy| = {self.max_px:.3f} px: {verdict}"


def _as_arrays(corrs: Sequence[Correspondence]) -> Tuple[np.ndarray, np.ndarray]:
    left = np.array([[c.left.x, c.left.y] for c in corrs], dtype=np.float64).reshape(-1, 2)
    right = np.array([[c.right.x, c.right.y] for c in corrs], dtype=np.float64).reshape(-1, 2)
    return left, right


def _hartley(points: np.ndarray) -> np.ndarray:
    """Similarity moving the centroid to the origin with RMS distance sqrt(2)"""
    centroid = points.mean(axis=0)
    rms = np.sqrt(((points - centroid) ** 2).sum(axis=1).mean())
    if rms <= RANK_TOLERANCE:
        raise DegenerateConfiguration("all points coincide")
    s = np.sqrt(2.0) / rms
    return np.array([
        [s, 0.0, -s * centroid[0]],
        [0.0, s, -s * centroid[1]],
        [0.0, 0.0, 1.0],
    ])


def _homogeneous(points: np.ndarray) -> np.ndarray:
    return np.hstack([points, np.ones((points.shape[0], 1))])


def _canonical(m: np.ndarray) -> np.ndarray:
    """Unit Frobenius norm with the largest-magnitude entry positive"""
    m = m / np.linalg.norm(m)
    flat = m.ravel()
    if flat[np.argmax(np.abs(flat))] < 0:
        m = -m
    return m


def _eight_point(left: np.ndarray, right: np.ndarray) -> np.ndarray:
    t_left = _hartley(left)
    t_right = _hartley(right)
    xl = _homogeneous(left) @ t_left.T
    xr = _homogeneous(right) @ t_right.T

    # rows of x'^T F x = 0 with F flattened row-major
    design = np.column_stack([
        xr[:, 0] * xl[:, 0], xr[:, 0] * xl[:, 1], xr[:, 0],
        xr[:, 1] * xl[:, 0], xr[:, 1] * xl[:, 1], xr[:, 1],
        xl[:, 0], xl[:, 1], np.ones(len(xl)),
    ])
    _, s, vt = np.linalg.svd(design, full_matrices=True)
    if s[MIN_CORRESPONDENCES - 1] < RANK_TOLERANCE * s[0]:
        raise DegenerateConfiguration("design matrix has a multi-dimensional null space")
    f_norm = vt[-1].reshape(3, 3)

    u, sv, vt_f = np.linalg.svd(f_norm)
    sv[2] = 0.0
    f_norm = u @ np.diag(sv) @ vt_f

    return _canonical(t_right.T @ f_norm @ t_left)


def estimate_fundamental_8point(corrs: Sequence[Correspondence]) -> FundamentalMatrix:
    """Normalized 8-point estimate of F from at least 8 correspondences"""
    if len(corrs) < MIN_CORRESPONDENCES:
        raise TooFewCorrespondences(
            f"need {MIN_CORRESPONDENCES} correspondences, got {len(corrs)}"
        )
    left, right = _as_arrays(corrs)
    return FundamentalMatrix(_eight_point(left, right))


def _symmetric_distances(m: np.ndarray, left: np.ndarray, right: np.ndarray) -> np.ndarray:
    """Mean point-to-epiline distance; inf where an epiline has a zero normal"""
    xl = _homogeneous(left)
    xr = _homogeneous(right)
    lines_right = xl @ m.T      # F x, lines in the right image
    lines_left = xr @ m         # F^T x', lines in the left image
    algebraic = np.abs(np.einsum("ij,ij->i", xr, lines_right))
    n_right = np.hypot(lines_right[:, 0], lines_right[:, 1])
    n_left = np.hypot(lines_left[:, 0], lines_left[:, 1])
    with np.errstate(divide="ignore", invalid="ignore"):
        dist = 0.5 * (algebraic / n_right + algebraic / n_left)
    dist[(n_right == 0) | (n_left == 0)] = np.inf
    return dist


def epipolar_residual(f: FundamentalMatrix, c: Correspondence) -> float:
    """Symmetric epipolar distance of one correspondence, in pixels"""
    left, right = _as_arrays([c])
    dist = _symmetric_distances(f.m, left, right)[0]
    if not np.isfinite(dist):
        raise DegenerateLine("epipolar line has a zero normal")
    return float(dist)


def algebraic_residuals(f: FundamentalMatrix, corrs: Sequence[Correspondence],
                        normalized: bool = True) -> np.ndarray:
    """|x'^T F x| per correspondence.

    With normalized=True both the points and F are expressed in the
    Hartley-normalized frame of this set, so the values are scale-free.
    """
    left, right = _as_arrays(corrs)
    m = f.m
    xl, xr = _homogeneous(left), _homogeneous(right)
    if normalized:
        t_left, t_right = _hartley(left), _hartley(right)
        m = np.linalg.inv(t_right).T @ m @ np.linalg.inv(t_left)
        m = m / np.linalg.norm(m)
        xl, xr = xl @ t_left.T, xr @ t_right.T
    return np.abs(np.einsum("ij,ij->i", xr, xl @ m.T))


def ransac_fundamental(corrs: Sequence[Correspondence],
                       cfg: RansacConfig) -> Tuple[FundamentalMatrix, np.ndarray]:
    """Best-consensus F refit on its inliers, plus the final inlier mask.

    The generator is local to the call, so a given seed reproduces the
    same result.
    """
    n = len(corrs)
    if n < MIN_CORRESPONDENCES:
        raise TooFewCorrespondences(f"need {MIN_CORRESPONDENCES} correspondences, got {n}")
    left, right = _as_arrays(corrs)
    rng = np.random.default_rng(cfg.seed)

    best_mask = None
    best_count = -1
    for _ in range(cfg.iterations):
        sample = rng.choice(n, MIN_CORRESPONDENCES, replace=False)
        try:
            candidate = _eight_point(left[sample], right[sample])
        except DegenerateConfiguration:
            continue
        mask = _symmetric_distances(candidate, left, right) <= cfg.inlier_threshold_px
        count = int(mask.sum())
        if count > best_count:
            best_count, best_mask = count, mask

    if best_mask is None or best_count < MIN_CORRESPONDENCES:
        raise ConsensusTooSmall("no sample produced a usable consensus set")
    if best_count / n < cfg.min_inlier_fraction:
        raise ConsensusTooSmall(
            f"best consensus {best_count}/{n} below fraction {cfg.min_inlier_fraction}"
        )

    refit = _eight_point(left[best_mask], right[best_mask])
    mask = _symmetric_distances(refit, left, right) <= cfg.inlier_threshold_px
    return FundamentalMatrix(refit), mask


def essential_from_fundamental(f: FundamentalMatrix, left: CameraIntrinsics,
                               right: CameraIntrinsics) -> EssentialMatrix:
    """E = K'^T F K projected onto singular values (s, s, 0)"""
    f.validate()
    raw = right.matrix.T @ f.m @ left.matrix
    u, s, vt = np.linalg.svd(raw)
    sigma = 0.5 * (s[0] + s[1])
    return EssentialMatrix(u @ np.diag([sigma, sigma, 0.0]) @ vt)


def check_alignment(corrs: Sequence[Correspondence],
                    threshold_px: float = DEFAULT_ALIGNMENT_THRESHOLD_PX) -> AlignmentReport:
    """Row alignment of a rig judged from |y' - y| over the correspondences"""
    if not corrs:
        raise EmptyInput("alignment check needs at least one correspondence")
    left, right = _as_arrays(corrs)
    dy = np.abs(right[:, 1] - left[:, 1])
    max_dy = float(dy.max())
    return AlignmentReport(float(dy.mean()), max_dy, max_dy <= threshold_px)


def inliers_of(corrs: Sequence[Correspondence], mask: np.ndarray) -> List[Correspondence]:
    return [c for c, keep in zip(corrs, mask) if keep]

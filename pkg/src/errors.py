"""
Errors
Exception hierarchy shared by every StereoNav module
"""


class StereoNavError(Exception):
    """Base class for all StereoNav errors"""


# Geometry

class NonPositiveDisparity(StereoNavError):
    """Disparity is zero or negative (point at infinity or invalid match)"""


class NonPositiveDepth(StereoNavError):
    """Depth is zero or negative"""


class DegenerateW(StereoNavError):
    """Homogeneous coordinate W too close to zero for the divide"""


class BehindCamera(StereoNavError):
    """Point lies on or behind the image plane"""


# Epipolar calibration

class TooFewCorrespondences(StereoNavError):
    """Fewer correspondences than the solver needs"""


class DegenerateConfiguration(StereoNavError):
    """Correspondences do not constrain the model"""


class ConsensusTooSmall(StereoNavError):
    """Best RANSAC consensus below the required inlier fraction"""


class DegenerateLine(StereoNavError):
    """Epipolar line with a zero normal"""


class EmptyInput(StereoNavError):
    """Operation needs at least one element"""


class InvariantViolation(StereoNavError):
    """A value breaks the invariants of its type"""


# Matching

class SizeMismatch(StereoNavError):
    """Images or maps do not share dimensions"""


class ParamsInvalid(StereoNavError):
    """Parameters violate their invariants"""


# Configuration

class ParseError(StereoNavError):
    """Malformed configuration or data file line"""

    def __init__(self, message: str, line: int = 0, source: str = ""):
        self.line = line
        self.source = source
        where = f"{source}:{line}: " if source else (f"line {line}: " if line else "")
        super().__init__(f"{where}{message}")


class ValidationError(StereoNavError):
    """Configuration value violates a named invariant"""

    def __init__(self, invariant: str, detail: str = ""):
        self.invariant = invariant
        super().__init__(f"{invariant}" + (f" ({detail})" if detail else ""))


# Warnings

class BandOutsideHoropter(UserWarning):
    """Obstacle depth band maps outside the matcher disparity range"""

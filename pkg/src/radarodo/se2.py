"""SE(2) pose algebra and least-squares rigid alignment of 2D point sets."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateGeometryError, UnderdeterminedError

_TWO_PI = 2.0 * math.pi


def wrap_angle(theta: float) -> float:
    """Normalize an angle to (-pi, pi]."""
    t = (theta + math.pi) % _TWO_PI - math.pi
    return math.pi if t == -math.pi else t


@dataclass(frozen=True)
class Pose2:
    """Rigid transform in the plane; theta is stored wrapped to (-pi, pi]."""

    x: float = 0.0
    y: float = 0.0
    theta: float = 0.0

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.x, self.y, self.theta)):
            raise ValueError("pose components must be finite")
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "y", float(self.y))
        object.__setattr__(self, "theta", wrap_angle(float(self.theta)))

    @property
    def translation(self) -> np.ndarray:
        return np.array([self.x, self.y])

    @property
    def rotation(self) -> np.ndarray:
        c, s = math.cos(self.theta), math.sin(self.theta)
        return np.array([[c, -s], [s, c]])


def compose(a: Pose2, b: Pose2) -> Pose2:
    """Chain two transforms: the result maps b-coordinates through a."""
    t = a.rotation @ b.translation + a.translation
    return Pose2(t[0], t[1], a.theta + b.theta)


def inverse(a: Pose2) -> Pose2:
    t = -(a.rotation.T @ a.translation)
    return Pose2(t[0], t[1], -a.theta)


def relative_pose(a: Pose2, b: Pose2) -> Pose2:
    """Pose of frame b expressed in frame a (both given in a common frame)."""
    return compose(inverse(a), b)


def apply_pose(pose: Pose2, points) -> np.ndarray:
    """Transform an (N, 2) array of points (or a single point) by ``pose``."""
    pts = np.asarray(points, dtype=float)
    return pts @ pose.rotation.T + pose.translation


def estimate_se2(src, dst) -> Pose2:
    """Least-squares rigid transform mapping ``src`` points onto ``dst``.

    Uses the SVD of the demeaned cross-covariance with a determinant guard,
    so the result is always a proper rotation (never a reflection).
    """
    src = np.asarray(src, dtype=float)
    dst = np.asarray(dst, dtype=float)
    if src.shape != dst.shape or src.ndim != 2 or src.shape[1] != 2:
        raise ValueError("src and dst must be matching (N, 2) arrays")
    if src.shape[0] < 2:
        raise UnderdeterminedError("need at least 2 point pairs, got %d" % src.shape[0])
    cs = src.mean(axis=0)
    cd = dst.mean(axis=0)
    a = src - cs
    b = dst - cd
    if not np.any(a):
        raise DegenerateGeometryError("all source points coincide")
    u, _, vt = np.linalg.svd(a.T @ b)
    d = math.copysign(1.0, np.linalg.det(vt.T @ u.T))
    rot = vt.T @ np.diag([1.0, d]) @ u.T
    theta = math.atan2(rot[1, 0], rot[0, 0])
    t = cd - rot @ cs
    return Pose2(t[0], t[1], theta)

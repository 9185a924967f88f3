"""Vectors, poses, frames and point clouds.

Vectors are plain ``numpy`` arrays of shape ``(3,)``. Attitude is yaw only:
roll and pitch are taken as zero everywhere in the planner.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import FrameMismatch, ZeroVector

EPS = 1e-9
TWO_PI = 2.0 * math.pi

Vec3 = np.ndarray
UP = np.array([0.0, 0.0, 1.0])


class FrameTag(str, enum.Enum):
    WORLD = "WORLD"
    BODY = "BODY"
    OPTICAL = "OPTICAL"


def vec3(x, y=None, z=None) -> Vec3:
    if y is None:
        return np.asarray(x, dtype=float).reshape(3)
    return np.array([x, y, z], dtype=float)


def normalize(v) -> Vec3:
    v = vec3(v)
    n = float(np.linalg.norm(v))
    if n <= EPS:
        raise ZeroVector(f"cannot normalize vector of norm {n:g}")
    return v / n


def cross(a, b) -> Vec3:
    a = vec3(a)
    b = vec3(b)
    return np.array(
        [
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        ]
    )


def wrap_angle(a: float) -> float:
    """Wrap an angle to [-pi, pi]; -pi is mapped to +pi."""
    r = math.remainder(float(a), TWO_PI)
    if r <= -math.pi:
        r = math.pi
    return r


@dataclass(frozen=True)
class Pose:
    """Position in meters plus heading in radians (wrapped on construction)."""

    x: float
    y: float
    z: float
    yaw: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "y", float(self.y))
        object.__setattr__(self, "z", float(self.z))
        object.__setattr__(self, "yaw", wrap_angle(self.yaw))
        if not all(math.isfinite(v) for v in (self.x, self.y, self.z)):
            raise ValueError(f"non-finite pose position {self}")

    @classmethod
    def at(cls, position, yaw: float = 0.0) -> "Pose":
        p = vec3(position)
        return cls(p[0], p[1], p[2], yaw)

    @property
    def position(self) -> Vec3:
        return np.array([self.x, self.y, self.z])

    def with_yaw(self, yaw: float) -> "Pose":
        return Pose(self.x, self.y, self.z, yaw)

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.x, self.y, self.z, self.yaw)


@dataclass
class PointCloud:
    points: np.ndarray = field(default_factory=lambda: np.empty((0, 3)))
    frame: FrameTag = FrameTag.WORLD

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.size == 0:
            pts = np.empty((0, 3))
        self.points = pts.reshape(-1, 3)
        self.frame = FrameTag(self.frame)

    def __len__(self) -> int:
        return len(self.points)

    @property
    def empty(self) -> bool:
        return len(self.points) == 0


def yaw_matrix(yaw: float) -> np.ndarray:
    c, s = math.cos(yaw), math.sin(yaw)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def body_to_world(points: np.ndarray, agent: Pose) -> np.ndarray:
    return np.asarray(points, dtype=float).reshape(-1, 3) @ yaw_matrix(agent.yaw).T + agent.position


def world_to_body(points: np.ndarray, agent: Pose) -> np.ndarray:
    return (np.asarray(points, dtype=float).reshape(-1, 3) - agent.position) @ yaw_matrix(agent.yaw)


def transform(
    cloud: PointCloud,
    src: FrameTag,
    dst: FrameTag,
    agent: Pose,
    optical_offset=(0.0, 0.0, 0.0),
) -> PointCloud:
    """Rigidly move ``cloud`` from frame ``src`` to frame ``dst``.

    OPTICAL differs from BODY only by a fixed translation ``optical_offset``
    (expressed in BODY axes); the camera looks along body +x.
    """
    src, dst = FrameTag(src), FrameTag(dst)
    if cloud.frame != src:
        raise FrameMismatch(f"cloud is tagged {cloud.frame.value}, not {src.value}")
    offset = vec3(optical_offset)
    pts = cloud.points.copy()
    if src == dst:
        return PointCloud(pts, dst)

    # Bring everything to BODY first.
    if src == FrameTag.OPTICAL:
        pts = pts + offset
    elif src == FrameTag.WORLD:
        pts = world_to_body(pts, agent)

    if dst == FrameTag.OPTICAL:
        pts = pts - offset
    elif dst == FrameTag.WORLD:
        pts = body_to_world(pts, agent)
    return PointCloud(pts, dst)


def round_half_away(x: float) -> int:
    """Round to the nearest integer with .5 going away from zero."""
    return int(math.copysign(math.floor(abs(x) + 0.5), x))

"""First-look view planner with the distance-regulating safety layer.

Each step looks only at the current filtered cloud: the nearest point
defines the view direction, the lateral move is sized by the horizontal
overlap, and a correction along the view direction restores the stand-off
distance. A recognized scene adds a vertical move sized by the vertical
overlap.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateView, EmptyCloud
from .geometry import UP, FrameTag, PointCloud, Pose, Vec3, body_to_world, cross, normalize, vec3, wrap_angle
from .kdtree import nearest_index
from .params import PlannerParams

HORIZONTAL_EPS = 1e-6


class StepKind(str, enum.Enum):
    LATERAL = "LATERAL"
    ASCEND = "ASCEND"
    TOP_REACHED = "TOP_REACHED"
    LOST_SURFACE = "LOST_SURFACE"


@dataclass(frozen=True)
class ViewBasis:
    v_x: Vec3
    v_y: Vec3
    v_z: Vec3

    def matrix(self) -> np.ndarray:
        return np.column_stack([self.v_x, self.v_y, self.v_z])


@dataclass(frozen=True)
class InspectionStep:
    next_pose: Pose
    poi: Vec3
    basis: ViewBasis
    ascended: bool
    kind: StepKind
    distance: float
    overlap_h: float
    overlap_v: float


def nearest_point(cloud, p) -> Vec3:
    """Closest cloud point to ``p`` (k-d tree search, first index wins ties)."""
    pts = cloud.points if isinstance(cloud, PointCloud) else np.asarray(cloud, dtype=float).reshape(-1, 3)
    if len(pts) == 0:
        raise EmptyCloud("no points to search")
    return pts[nearest_index(pts, vec3(p))].copy()


def _horizontal_norm(v: Vec3) -> float:
    return math.hypot(v[0], v[1])


def view_basis(p_poi, p_mav) -> ViewBasis:
    """Toward-surface, lateral and upward unit vectors at ``p_mav``.

    v_y is ``cross(up, v_x)``; v_z is ``cross(v_x, v_y)`` so that it points
    upward and the triad is right-handed.
    """
    v_x = normalize(vec3(p_poi) - vec3(p_mav))
    if _horizontal_norm(v_x) < HORIZONTAL_EPS:
        raise DegenerateView("point of interest is straight above or below the agent")
    v_y = normalize(cross(UP, v_x))
    v_z = cross(v_x, v_y)
    return ViewBasis(v_x, v_y, v_z)


def heading_of(v_x) -> float:
    v = vec3(v_x)
    if _horizontal_norm(v) < HORIZONTAL_EPS:
        raise DegenerateView("view direction has no horizontal component")
    return wrap_angle(math.atan2(v[1], v[0]))


def overlap_step(p_mav, p_poi, fov: float, gamma: float) -> float:
    """Footprint advance that keeps a ``gamma`` fraction of the previous view."""
    d = float(np.linalg.norm(vec3(p_poi) - vec3(p_mav)))
    return 2.0 * math.tan(fov / 2.0) * d - 2.0 * gamma * math.tan(fov / 2.0) * d


def horizontal_overlap(p_mav, p_poi, alpha: float, gamma_h: float) -> float:
    return overlap_step(p_mav, p_poi, alpha, gamma_h)


def vertical_overlap(p_mav, p_poi, beta: float, gamma_v: float) -> float:
    return overlap_step(p_mav, p_poi, beta, gamma_v)


def inspection_step(
    p_mav: Pose,
    cloud: PointCloud,
    visited_scene: bool,
    params: PlannerParams,
) -> InspectionStep:
    """Plan the next inspection pose from the current filtered cloud.

    A BODY-frame cloud is moved to WORLD with ``p_mav`` first.
    """
    pts = cloud.points
    if cloud.frame == FrameTag.BODY:
        pts = body_to_world(pts, p_mav)
    if len(pts) == 0:
        raise EmptyCloud("inspection step needs a non-empty cloud")
    p = p_mav.position
    poi = pts[nearest_index(pts, p)].copy()
    basis = view_basis(poi, p)
    d = float(np.linalg.norm(poi - p))

    o_h = horizontal_overlap(p, poi, params.alpha, params.gamma_h)
    target = p + basis.v_y * o_h + basis.v_x * (d - params.d_safety)
    kind = StepKind.LATERAL
    o_v = 0.0
    if visited_scene:
        o_v = vertical_overlap(p, poi, params.beta, params.gamma_v)
        target = target + basis.v_z * o_v
        kind = StepKind.ASCEND
    if float(np.max(pts[:, 2])) < target[2]:
        kind = StepKind.TOP_REACHED

    return InspectionStep(
        next_pose=Pose.at(target, heading_of(basis.v_x)),
        poi=poi,
        basis=basis,
        ascended=visited_scene,
        kind=kind,
        distance=d,
        overlap_h=o_h,
        overlap_v=o_v,
    )

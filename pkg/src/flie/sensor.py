"""Forward-looking depth camera simulation.

Rays are laid out on a regular azimuth/elevation grid about the body +x
axis and intersected exactly with the scenario boxes and the ground plane.
Filtering mirrors the on-board pipeline: a depth band along the viewing
direction, a lateral clamp, a world-height ground mask and a voxel-grid
centroid downsample.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .errors import FrameMismatch
from .geometry import FrameTag, PointCloud, Pose, vec3, world_to_body, yaw_matrix
from .params import SensorParams
from .recognition import SceneSignature

if TYPE_CHECKING:
    from .world import Scenario

OCCLUSION_TOL = 1e-6


@dataclass
class SensorFrame:
    cloud: PointCloud
    signature: SceneSignature
    raw_count: int


def sensor_origin(pose: Pose, params: SensorParams) -> np.ndarray:
    return pose.position + yaw_matrix(pose.yaw) @ vec3(params.optical_offset)


def ray_directions(params: SensorParams) -> np.ndarray:
    """Unit ray directions in BODY axes, row-major over (elevation, azimuth)."""
    rows, cols = params.ray_grid
    el = np.linspace(-params.beta / 2, params.beta / 2, rows)
    az = np.linspace(-params.alpha / 2, params.alpha / 2, cols)
    E, A = np.meshgrid(el, az, indexing="ij")
    d = np.stack([np.cos(E) * np.cos(A), np.cos(E) * np.sin(A), np.sin(E)], axis=-1)
    return d.reshape(-1, 3)


def _slab_hits(origin: np.ndarray, dirs: np.ndarray, boxes: np.ndarray):
    """Entry distance and entry axis of every ray against every box.

    Returns ``(t, axis)`` of shape ``(n_rays, n_boxes)``; ``t`` is ``inf``
    where the ray misses or starts inside the box.
    """
    n, m = len(dirs), len(boxes)
    if m == 0:
        return np.full((n, 0), np.inf), np.zeros((n, 0), dtype=int)
    lo = boxes[None, :, :3] - origin
    hi = boxes[None, :, 3:] - origin
    d = dirs[:, None, :]
    zero = d == 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        t1 = lo / d
        t2 = hi / d
    tmin = np.minimum(t1, t2)
    tmax = np.maximum(t1, t2)
    # Parallel to a slab: either always inside it or never.
    inside = (lo <= 0.0) & (hi >= 0.0)
    tmin = np.where(zero, np.where(inside, -np.inf, np.inf), tmin)
    tmax = np.where(zero, np.where(inside, np.inf, -np.inf), tmax)
    axis = np.argmax(tmin, axis=2)
    tnear = np.max(tmin, axis=2)
    tfar = np.min(tmax, axis=2)
    hit = (tnear <= tfar) & (tnear > 0.0)
    return np.where(hit, tnear, np.inf), axis


def _ground_hits(origin: np.ndarray, dirs: np.ndarray) -> np.ndarray:
    dz = dirs[:, 2]
    t = np.full(len(dirs), np.inf)
    down = dz < 0.0
    if origin[2] > 0.0:
        t[down] = -origin[2] / dz[down]
    return t


def cast(origin: np.ndarray, dirs: np.ndarray, boxes: np.ndarray):
    """Nearest surface along each world-frame ray.

    Returns ``(t, points)``; box hits are snapped onto the exact face plane
    so that flat walls produce coplanar samples.
    """
    t_box, axis = _slab_hits(origin, dirs, boxes)
    t_ground = _ground_hits(origin, dirs)
    if t_box.shape[1]:
        best = np.argmin(t_box, axis=1)
        rows = np.arange(len(dirs))
        tb = t_box[rows, best]
    else:
        best = np.zeros(len(dirs), dtype=int)
        rows = np.arange(len(dirs))
        tb = np.full(len(dirs), np.inf)
    use_ground = t_ground < tb
    t = np.where(use_ground, t_ground, tb)
    finite = np.isfinite(t)
    pts = origin + np.where(finite, t, 0.0)[:, None] * dirs
    pts[~finite] = np.inf
    pts[finite & use_ground, 2] = 0.0
    idx = np.nonzero(finite & ~use_ground)[0]
    if len(idx):
        b = best[idx]
        ax = axis[idx, b]
        face = np.where(dirs[idx, ax] > 0, boxes[b, ax], boxes[b, 3 + ax])
        pts[idx, ax] = face
    return t, pts


def raycast(scene: "Scenario", pose: Pose, params: SensorParams, rng=None) -> PointCloud:
    """Depth samples in BODY frame for every ray that hits within ``max_range``."""
    origin = sensor_origin(pose, params)
    dirs_body = ray_directions(params)
    dirs = dirs_body @ yaw_matrix(pose.yaw).T
    t, pts = cast(origin, dirs, scene.box_array())
    keep = t <= params.max_range
    if params.noise_sigma > 0.0 and rng is not None:
        noisy = t + rng.normal(0.0, params.noise_sigma, len(t))
        pts[keep] = origin + noisy[keep, None] * dirs[keep]
        keep &= noisy > 0.0
    return PointCloud(world_to_body(pts[keep], pose), FrameTag.BODY)


def voxel_downsample(points: np.ndarray, voxel: float) -> np.ndarray:
    """One centroid per occupied voxel, ordered by voxel index."""
    points = np.asarray(points, dtype=float).reshape(-1, 3)
    if len(points) == 0:
        return points
    keys = np.floor(points / voxel).astype(np.int64)
    _, inverse, counts = np.unique(keys, axis=0, return_inverse=True, return_counts=True)
    inverse = inverse.ravel()
    sums = np.zeros((len(counts), 3))
    np.add.at(sums, inverse, points)
    return sums / counts[:, None]


def filter_cloud(cloud: PointCloud, params: SensorParams, agent: Pose | None = None) -> PointCloud:
    """Depth band, lateral clamp, ground mask, then voxel-grid centroids.

    ``agent`` supplies the altitude used by the ground mask; without it the
    BODY origin is assumed to sit at ``z = 0``.
    """
    if cloud.frame != FrameTag.BODY:
        raise FrameMismatch("filter_cloud expects a BODY-frame cloud")
    p = cloud.points
    z0 = agent.z if agent is not None else 0.0
    keep = (
        (p[:, 0] >= params.min_range)
        & (p[:, 0] <= params.max_range)
        & (np.abs(p[:, 1]) <= params.lateral_clamp)
        & (p[:, 2] + z0 >= params.ground_mask)
    )
    return PointCloud(voxel_downsample(p[keep], params.voxel_size), FrameTag.BODY)


def in_frustum(body_points: np.ndarray, params: SensorParams) -> np.ndarray:
    p = np.asarray(body_points, dtype=float).reshape(-1, 3)
    az = np.arctan2(p[:, 1], p[:, 0])
    el = np.arctan2(p[:, 2], np.hypot(p[:, 0], p[:, 1]))
    return (p[:, 0] > 0.0) & (np.abs(az) <= params.alpha / 2) & (np.abs(el) <= params.beta / 2)


def visible_landmarks(scene: "Scenario", pose: Pose, params: SensorParams) -> SceneSignature:
    """Landmarks inside the frustum, within range and not hidden by a surface."""
    lms = scene.landmark_array()
    if len(lms) == 0:
        return SceneSignature(frozenset(), pose)
    origin = sensor_origin(pose, params)
    offset = vec3(params.optical_offset)
    body = world_to_body(lms, pose) - offset
    dist = np.linalg.norm(body, axis=1)
    cand = np.nonzero(in_frustum(body, params) & (dist <= params.max_range) & (dist > 0.0))[0]
    if len(cand) == 0:
        return SceneSignature(frozenset(), pose)
    dirs = (lms[cand] - origin) / dist[cand, None]
    t_box, _ = _slab_hits(origin, dirs, scene.box_array())
    t_near = np.min(t_box, axis=1) if t_box.shape[1] else np.full(len(cand), np.inf)
    t_near = np.minimum(t_near, _ground_hits(origin, dirs))
    seen = t_near >= dist[cand] - OCCLUSION_TOL
    ids = frozenset(int(scene.landmarks[i].id) for i in cand[seen])
    return SceneSignature(ids, pose)


def sense(scene: "Scenario", pose: Pose, params: SensorParams, rng=None) -> SensorFrame:
    raw = raycast(scene, pose, params, rng)
    cloud = filter_cloud(raw, params, pose)
    return SensorFrame(cloud, visible_landmarks(scene, pose, params), len(raw))


__all__ = [
    "SensorFrame",
    "SensorParams",
    "cast",
    "filter_cloud",
    "in_frustum",
    "raycast",
    "ray_directions",
    "sense",
    "visible_landmarks",
    "voxel_downsample",
]

"""Mission log, merged cloud, coverage/volume metrics and file export.

Four files are written per run:

``trajectory.csv``
    one row per tick, commanded then actual pose.
``events.log``
    ``TAG STEP {json payload}`` per line.
``cloud.ply``
    ASCII PLY, float32 ``x y z`` vertices of the merged WORLD cloud.
``metrics.txt``
    ``key: value`` lines.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree

from .errors import FrameMismatch, NoInspectionData
from .geometry import FrameTag, PointCloud, Pose, body_to_world

TRAJECTORY_HEADER = "step,mode,cx,cy,cz,cyaw,ax,ay,az,ayaw"


@dataclass
class TickRecord:
    step: int
    mode: str
    commanded: Pose
    actual: Pose
    sense_pose: Pose
    cloud_size: int = 0
    raw_count: int = 0
    score: float | None = None
    threshold: float | None = None
    gain: int | None = None
    poi_distance: float | None = None
    merged_size: int = 0
    events: list[str] = field(default_factory=list)


@dataclass(frozen=True)
class Event:
    tag: str
    step: int
    payload: dict

    def line(self) -> str:
        return f"{self.tag} {self.step} {json.dumps(self.payload, sort_keys=True)}"


@dataclass
class MissionLog:
    voxel_size: float = 0.05
    records: list[TickRecord] = field(default_factory=list)
    events: list[Event] = field(default_factory=list)
    _merged: list[np.ndarray] = field(default_factory=list, repr=False)
    _keys: set = field(default_factory=set, repr=False)

    def emit(self, tag: str, step: int, **payload) -> None:
        self.events.append(Event(tag, step, payload))
        if self.records and self.records[-1].step == step:
            self.records[-1].events.append(tag)

    @property
    def merged_cloud(self) -> PointCloud:
        if not self._merged:
            return PointCloud(np.empty((0, 3)), FrameTag.WORLD)
        return PointCloud(np.array(self._merged), FrameTag.WORLD)

    def merged_prefix(self, n: int) -> PointCloud:
        return PointCloud(np.array(self._merged[:n]).reshape(-1, 3), FrameTag.WORLD)

    def events_tagged(self, tag: str) -> list[Event]:
        return [e for e in self.events if e.tag == tag]


@dataclass(frozen=True)
class MetricsReport:
    coverage_fraction: float
    inspected_volume: float
    path_length: float
    mean_distance_error: float
    num_view_poses: int
    termination: str
    structure_coverage: tuple[float, ...] = ()


def accumulate_cloud(log: MissionLog, frame_cloud: PointCloud, agent: Pose) -> MissionLog:
    """Add a BODY-frame frame to the merged WORLD cloud, one point per voxel.

    The first point to land in a voxel is kept, so merged-cloud prefixes are
    the cloud as it stood earlier in the mission.
    """
    if frame_cloud.frame != FrameTag.BODY:
        raise FrameMismatch("accumulate_cloud expects a BODY-frame cloud")
    if frame_cloud.empty:
        return log
    world = body_to_world(frame_cloud.points, agent)
    keys = np.floor(world / log.voxel_size).astype(np.int64)
    for key, p in zip(map(tuple, keys), world):
        if key not in log._keys:
            log._keys.add(key)
            log._merged.append(p)
    return log


def covered_mask(cloud: PointCloud, truth: PointCloud, radius: float) -> np.ndarray:
    if truth.empty:
        return np.zeros(0, dtype=bool)
    if cloud.empty:
        return np.zeros(len(truth), dtype=bool)
    dist, _ = cKDTree(cloud.points).query(truth.points, k=1)
    return dist <= radius


def coverage_of(cloud: PointCloud, truth: PointCloud, radius: float) -> float:
    """Fraction of ``truth`` points with a ``cloud`` point within ``radius``.

    An empty truth set gives 0.
    """
    if radius <= 0:
        raise ValueError("radius must be positive")
    mask = covered_mask(cloud, truth, radius)
    return float(mask.mean()) if len(mask) else 0.0


def coverage(log: MissionLog, truth: PointCloud, radius: float) -> float:
    return coverage_of(log.merged_cloud, truth, radius)


def voxel_volume(cloud, voxel: float) -> float:
    if voxel <= 0:
        raise ValueError("voxel must be positive")
    pts = cloud.points if isinstance(cloud, PointCloud) else np.asarray(cloud, dtype=float).reshape(-1, 3)
    if len(pts) == 0:
        return 0.0
    keys = np.unique(np.floor(pts / voxel).astype(np.int64), axis=0)
    return len(keys) * voxel**3


def inspection_distances(log: MissionLog) -> list[float]:
    return [r.poi_distance for r in log.records if r.mode == "INSPECT" and r.poi_distance is not None]


def mean_distance_error(log: MissionLog, d_safety: float) -> float:
    """Mean |distance to nearest cloud point - d_safety| over INSPECT ticks."""
    dists = inspection_distances(log)
    if not dists:
        raise NoInspectionData("log has no INSPECT ticks with a point of interest")
    return math.fsum(abs(d - d_safety) for d in dists) / len(dists)


def path_length(log: MissionLog) -> float:
    total = 0.0
    for r in log.records:
        total += float(np.linalg.norm(r.actual.position - r.sense_pose.position))
    return total


def truth_points(scene, structures=None) -> PointCloud:
    """Reference surface samples above the ground mask, spaced one voxel apart."""
    from .world import surface_points

    pts = surface_points(scene, scene.sensor.voxel_size, structures).points
    return PointCloud(pts[pts[:, 2] >= scene.sensor.ground_mask], FrameTag.WORLD)


def build_report(scene, log: MissionLog, termination: str, num_view_poses: int) -> MetricsReport:
    merged = log.merged_cloud
    radius = scene.coverage_radius
    try:
        mde = mean_distance_error(log, scene.params.d_safety)
    except NoInspectionData:
        mde = 0.0
    per = tuple(coverage_of(merged, truth_points(scene, [i]), radius) for i in range(len(scene.structures)))
    return MetricsReport(
        coverage_fraction=coverage_of(merged, truth_points(scene), radius),
        inspected_volume=voxel_volume(merged, log.voxel_size),
        path_length=path_length(log),
        mean_distance_error=mde,
        num_view_poses=int(num_view_poses),
        termination=str(termination),
        structure_coverage=per,
    )


# -- export ------------------------------------------------------------------


def _num(v: float) -> str:
    return repr(float(v))


def write_trajectory(log: MissionLog, path: Path) -> None:
    lines = [TRAJECTORY_HEADER]
    for r in log.records:
        c, a = r.commanded, r.actual
        lines.append(
            ",".join([str(r.step), r.mode] + [_num(v) for v in (c.x, c.y, c.z, c.yaw, a.x, a.y, a.z, a.yaw)])
        )
    path.write_text("\n".join(lines) + "\n")


def write_events(log: MissionLog, path: Path) -> None:
    path.write_text("".join(e.line() + "\n" for e in log.events))


def write_ply(points: np.ndarray, path: Path) -> None:
    pts = np.asarray(points, dtype=np.float32).reshape(-1, 3)
    head = [
        "ply",
        "format ascii 1.0",
        f"element vertex {len(pts)}",
        "property float x",
        "property float y",
        "property float z",
        "end_header",
    ]
    body = [" ".join(str(v) for v in row) for row in pts]
    path.write_text("\n".join(head + body) + "\n")


def write_metrics(report: MetricsReport, path: Path) -> None:
    lines = []
    for f in fields(report):
        v = getattr(report, f.name)
        if f.name == "structure_coverage":
            lines += [f"coverage_structure_{i}: {_num(c)}" for i, c in enumerate(v)]
        elif isinstance(v, float):
            lines.append(f"{f.name}: {_num(v)}")
        else:
            lines.append(f"{f.name}: {v}")
    path.write_text("\n".join(lines) + "\n")


def export(log: MissionLog, report: MetricsReport, out_dir, include_cloud: bool = True) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = [out / "trajectory.csv", out / "events.log", out / "metrics.txt"]
    write_trajectory(log, paths[0])
    write_events(log, paths[1])
    write_metrics(report, paths[2])
    if include_cloud:
        paths.append(out / "cloud.ply")
        write_ply(log.merged_cloud.points, paths[-1])
    return paths


# -- readers -----------------------------------------------------------------


def read_trajectory(path) -> list[dict]:
    rows = Path(path).read_text().splitlines()
    if not rows or rows[0] != TRAJECTORY_HEADER:
        raise ValueError(f"{path}: unexpected trajectory header")
    keys = TRAJECTORY_HEADER.split(",")
    out = []
    for line in rows[1:]:
        vals = line.split(",")
        rec = dict(zip(keys, vals))
        rec["step"] = int(rec["step"])
        for k in keys[2:]:
            rec[k] = float(rec[k])
        out.append(rec)
    return out


def read_events(path) -> list[Event]:
    out = []
    for line in Path(path).read_text().splitlines():
        tag, step, payload = line.split(" ", 2)
        out.append(Event(tag, int(step), json.loads(payload)))
    return out


def read_ply(path) -> np.ndarray:
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0] != "ply":
        raise ValueError(f"{path}: not a PLY file")
    n = 0
    end = lines.index("end_header")
    for line in lines[:end]:
        if line.startswith("element vertex"):
            n = int(line.split()[-1])
    body = lines[end + 1 : end + 1 + n]
    if len(body) != n:
        raise ValueError(f"{path}: expected {n} vertices, found {len(body)}")
    if n == 0:
        return np.empty((0, 3), dtype=np.float32)
    return np.array([[np.float32(v) for v in line.split()] for line in body], dtype=np.float32)


def read_metrics(path) -> dict[str, str]:
    out = {}
    for line in Path(path).read_text().splitlines():
        key, _, value = line.partition(":")
        out[key.strip()] = value.strip()
    return out

"""Synthetic environment: block structures, landmarks and scenario files.

A structure is a union of axis-aligned boxes standing on the ground plane
``z = 0``. Landmarks are points scattered on box faces; they stand in for
image features when the recognizer compares two views.

Scenario files are YAML mappings with flat top-level keys, e.g.::

    seed: 7
    start_pose: [0.0, -1.4, 0.6, -1.5708]
    structures:
      - [-1.5, -0.15, 0.0, 1.5, 0.15, 2.6]          # one box
      - [[3, 0, 0, 4, 1, 1], [3, 0, 1, 3.5, 1, 2]]  # two blocks, one structure
    gamma_h: 0.8
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
import yaml

from .errors import ParseError, ValidationError
from .geometry import FrameTag, PointCloud, Pose, round_half_away
from .params import PlannerParams, SensorParams, VehicleParams

DEFAULTS = {
    "alpha_deg": 86.0,
    "beta_deg": 57.0,
    "gamma_h": 0.8,
    "gamma_v": 0.5,
    "d_safety": 1.0,
    "gamma_threshold_init": 0.6,
    "N_horizon": 6,
    "sensor_max_range": 1.5,
    "sensor_min_range": 0.5,
    "lateral_clamp": 1.0,
    "ground_mask": 0.2,
    "landmark_density": 40.0,
    "max_steps": 500,
    "voxel_size": 0.05,
    "ray_rows": 33,
    "ray_cols": 49,
    "noise_sigma": 0.0,
    "optical_offset": [0.0, 0.0, 0.0],
    "max_speed": 1.0,
    "max_yaw_rate": 1.0,
    "dt": 0.1,
    "arrival_tol": 0.05,
    "heading_tol": 0.05,
    "revisit_similarity": 0.5,
    "coverage_radius": 0.1,
    "name": "",
}
REQUIRED = ("structures", "start_pose", "seed")
SCENARIO_DIR = Path(__file__).parent / "scenarios"


@dataclass(frozen=True)
class Box:
    lo: tuple[float, float, float]
    hi: tuple[float, float, float]

    def __post_init__(self):
        lo = tuple(float(v) for v in self.lo)
        hi = tuple(float(v) for v in self.hi)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        if len(lo) != 3 or len(hi) != 3:
            raise ValidationError("a box needs three min and three max coordinates")
        if not all(math.isfinite(v) for v in lo + hi):
            raise ValidationError(f"non-finite box corner in {lo}, {hi}")
        if not all(h > l for l, h in zip(lo, hi)):
            raise ValidationError(f"box {lo} -> {hi} has non-positive extent")

    @classmethod
    def from_six(cls, vals) -> "Box":
        vals = list(vals)
        if len(vals) != 6:
            raise ValidationError(f"a box is six floats, got {vals!r}")
        return cls(tuple(vals[:3]), tuple(vals[3:]))

    def contains(self, p, strict: bool = False) -> bool:
        if strict:
            return all(l < v < h for l, v, h in zip(self.lo, p, self.hi))
        return all(l <= v <= h for l, v, h in zip(self.lo, p, self.hi))

    def distance(self, p) -> float:
        """Euclidean distance from ``p`` to the closed box (0 inside)."""
        d = [max(l - v, 0.0, v - h) for l, v, h in zip(self.lo, p, self.hi)]
        return math.sqrt(sum(c * c for c in d))

    @property
    def volume(self) -> float:
        return float(np.prod(np.subtract(self.hi, self.lo)))

    def faces(self):
        """Yield ``(axis, side, value)`` for the six faces; side is -1 or +1."""
        for axis in range(3):
            yield axis, -1, self.lo[axis]
            yield axis, +1, self.hi[axis]


@dataclass(frozen=True)
class Structure:
    id: int
    blocks: tuple[Box, ...]
    landmark_density: float = 40.0


@dataclass(frozen=True)
class Landmark:
    id: int
    position: tuple[float, float, float]
    owner_structure: int


@dataclass(frozen=True)
class Scenario:
    structures: tuple[Structure, ...]
    start_pose: Pose
    params: PlannerParams = field(default_factory=PlannerParams)
    sensor: SensorParams = field(default_factory=SensorParams)
    seed: int = 0
    max_steps: int = 500
    vehicle: VehicleParams = field(default_factory=VehicleParams)
    revisit_similarity: float = 0.5
    coverage_radius: float = 0.1
    name: str = ""
    landmarks: tuple[Landmark, ...] = ()

    def __post_init__(self):
        for s in self.structures:
            for b in s.blocks:
                if b.contains(self.start_pose.position):
                    raise ValidationError(f"start pose lies inside structure {s.id}")
        if self.max_steps < 1:
            raise ValidationError("max_steps must be positive")

    @property
    def boxes(self) -> list[Box]:
        return [b for s in self.structures for b in s.blocks]

    def box_array(self) -> np.ndarray:
        """All blocks as an ``(n, 6)`` array of ``lo`` then ``hi`` corners."""
        boxes = self.boxes
        if not boxes:
            return np.empty((0, 6))
        return np.array([b.lo + b.hi for b in boxes], dtype=float)

    def landmark_array(self) -> np.ndarray:
        if not self.landmarks:
            return np.empty((0, 3))
        return np.array([lm.position for lm in self.landmarks], dtype=float)

    def distance_to_structures(self, p) -> float:
        boxes = self.boxes
        if not boxes:
            return math.inf
        return min(b.distance(p) for b in boxes)

    def with_landmarks(self) -> "Scenario":
        return replace(self, landmarks=tuple(scatter_landmarks(self)))


def _parse_structures(raw, density: float) -> tuple[Structure, ...]:
    if not isinstance(raw, list):
        raise ValidationError("`structures` must be a list")
    out = []
    for i, entry in enumerate(raw):
        if not isinstance(entry, list) or not entry:
            raise ValidationError(f"structure {i} must be a non-empty list")
        if all(isinstance(v, (int, float)) for v in entry):
            blocks = (Box.from_six(entry),)
        elif all(isinstance(v, list) for v in entry):
            blocks = tuple(Box.from_six(b) for b in entry)
        else:
            raise ValidationError(f"structure {i}: expected six floats or a list of boxes")
        out.append(Structure(i, blocks, density))
    return tuple(out)


def scenario_from_mapping(data: dict) -> Scenario:
    if not isinstance(data, dict):
        raise ParseError("scenario file must contain a mapping at top level")
    missing = [k for k in REQUIRED if k not in data]
    if missing:
        raise ValidationError(f"missing required key(s): {', '.join(missing)}")
    unknown = set(data) - set(REQUIRED) - set(DEFAULTS)
    if unknown:
        raise ValidationError(f"unknown key(s): {', '.join(sorted(unknown))}")
    cfg = {**DEFAULTS, **data}

    try:
        start = [float(v) for v in cfg["start_pose"]]
        seed = int(cfg["seed"])
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"bad start_pose/seed: {exc}") from None
    if len(start) != 4:
        raise ValidationError("start_pose is x, y, z, yaw")
    if seed < 0:
        raise ValidationError("seed must be unsigned")
    density = float(cfg["landmark_density"])
    if density < 0:
        raise ValidationError("landmark_density must be non-negative")

    try:
        params = PlannerParams(
            alpha=math.radians(float(cfg["alpha_deg"])),
            beta=math.radians(float(cfg["beta_deg"])),
            gamma_h=float(cfg["gamma_h"]),
            gamma_v=float(cfg["gamma_v"]),
            d_safety=float(cfg["d_safety"]),
            threshold_init=float(cfg["gamma_threshold_init"]),
            horizon=int(cfg["N_horizon"]),
        )
        sensor = SensorParams(
            alpha=params.alpha,
            beta=params.beta,
            max_range=float(cfg["sensor_max_range"]),
            min_range=float(cfg["sensor_min_range"]),
            lateral_clamp=float(cfg["lateral_clamp"]),
            ground_mask=float(cfg["ground_mask"]),
            ray_grid=(int(cfg["ray_rows"]), int(cfg["ray_cols"])),
            voxel_size=float(cfg["voxel_size"]),
            noise_sigma=float(cfg["noise_sigma"]),
            optical_offset=tuple(cfg["optical_offset"]),
        )
        vehicle = VehicleParams(
            max_speed=float(cfg["max_speed"]),
            max_yaw_rate=float(cfg["max_yaw_rate"]),
            dt=float(cfg["dt"]),
            arrival_tol=float(cfg["arrival_tol"]),
            heading_tol=float(cfg["heading_tol"]),
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(str(exc)) from None

    scenario = Scenario(
        structures=_parse_structures(cfg["structures"], density),
        start_pose=Pose(*start),
        params=params,
        sensor=sensor,
        seed=seed,
        max_steps=int(cfg["max_steps"]),
        vehicle=vehicle,
        revisit_similarity=float(cfg["revisit_similarity"]),
        coverage_radius=float(cfg["coverage_radius"]),
        name=str(cfg["name"]),
    )
    return scenario.with_landmarks()


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from None
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ParseError(f"{path}: {exc}") from None
    scenario = scenario_from_mapping(data)
    if not scenario.name:
        scenario = replace(scenario, name=path.stem)
    return scenario


def bundled_scenario(name: str) -> Scenario:
    """Load one of the scenarios shipped with the package by file stem."""
    return load_scenario(SCENARIO_DIR / f"{name}.yaml")


def scatter_landmarks(s: Scenario) -> list[Landmark]:
    """Place landmarks uniformly on every box face.

    Each face receives ``round(area * density)`` landmarks; positions come
    from a generator seeded with ``s.seed`` and faces are visited in a fixed
    order, so the result depends only on the scenario.
    """
    rng = np.random.default_rng(s.seed)
    out: list[Landmark] = []
    for st in s.structures:
        if st.landmark_density <= 0:
            continue
        for box in st.blocks:
            for axis, _side, value in box.faces():
                u, v = [a for a in range(3) if a != axis]
                area = (box.hi[u] - box.lo[u]) * (box.hi[v] - box.lo[v])
                n = round_half_away(area * st.landmark_density)
                if n == 0:
                    continue
                pts = np.empty((n, 3))
                pts[:, axis] = value
                pts[:, u] = rng.uniform(box.lo[u], box.hi[u], n)
                pts[:, v] = rng.uniform(box.lo[v], box.hi[v], n)
                for p in pts:
                    out.append(Landmark(len(out), (float(p[0]), float(p[1]), float(p[2])), st.id))
    return out


def _face_grid(box: Box, axis: int, value: float, resolution: float) -> np.ndarray:
    u, v = [a for a in range(3) if a != axis]
    nu = max(1, math.ceil((box.hi[u] - box.lo[u]) / resolution - 1e-9))
    nv = max(1, math.ceil((box.hi[v] - box.lo[v]) / resolution - 1e-9))
    gu, gv = np.meshgrid(
        np.linspace(box.lo[u], box.hi[u], nu + 1),
        np.linspace(box.lo[v], box.hi[v], nv + 1),
        indexing="ij",
    )
    pts = np.empty((gu.size, 3))
    pts[:, axis] = value
    pts[:, u] = gu.ravel()
    pts[:, v] = gv.ravel()
    return pts


def _inside_any(points: np.ndarray, boxes: np.ndarray) -> np.ndarray:
    if len(boxes) == 0 or len(points) == 0:
        return np.zeros(len(points), dtype=bool)
    lo = boxes[None, :, :3]
    hi = boxes[None, :, 3:]
    p = points[:, None, :]
    return np.any(np.all((p >= lo) & (p <= hi), axis=2), axis=1)


def surface_points(s: Scenario, resolution: float, structures=None) -> PointCloud:
    """Grid-sample the exterior faces of all (or the selected) structures.

    A sample is exterior when a tiny step along its face normal leaves every
    box, so faces buried inside or glued to another block are dropped. The
    result is deduplicated and sorted, hence independent of structure order.
    """
    if resolution <= 0:
        raise ValueError("resolution must be positive")
    all_boxes = s.box_array()
    chosen = s.structures if structures is None else [s.structures[i] for i in structures]
    chunks = []
    for st in chosen:
        for box in st.blocks:
            for axis, side, value in box.faces():
                pts = _face_grid(box, axis, value, resolution)
                probe = pts.copy()
                probe[:, axis] += side * 1e-6
                chunks.append(pts[~_inside_any(probe, all_boxes)])
    if not chunks:
        return PointCloud(np.empty((0, 3)), FrameTag.WORLD)
    pts = np.concatenate(chunks)
    pts = np.unique(np.round(pts, 9) + 0.0, axis=0)
    return PointCloud(pts, FrameTag.WORLD)

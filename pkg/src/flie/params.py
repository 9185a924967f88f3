"""Parameter bundles shared by the scenario loader and the planners.

Defaults follow the indoor trial configuration: 86/57 degree field of view,
0.8/0.5 overlap factors, 1 m stand-off, 0.6 initial similarity threshold,
0.5-1.5 m usable depth band, +/-1 m lateral clamp and a 0.2 m ground mask.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ValidationError


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise ValidationError(msg)


@dataclass(frozen=True)
class PlannerParams:
    alpha: float = math.radians(86.0)
    beta: float = math.radians(57.0)
    gamma_h: float = 0.8
    gamma_v: float = 0.5
    d_safety: float = 1.0
    threshold_init: float = 0.6
    horizon: int = 6

    def __post_init__(self):
        _require(0.0 < self.alpha < math.pi, f"alpha must lie in (0, pi), got {self.alpha}")
        _require(0.0 < self.beta < math.pi, f"beta must lie in (0, pi), got {self.beta}")
        _require(0.0 <= self.gamma_h < 1.0, f"gamma_h must lie in [0, 1), got {self.gamma_h}")
        _require(0.0 <= self.gamma_v < 1.0, f"gamma_v must lie in [0, 1), got {self.gamma_v}")
        _require(self.d_safety > 0.0, f"d_safety must be positive, got {self.d_safety}")
        _require(0.0 <= self.threshold_init <= 1.0, "threshold_init must lie in [0, 1]")
        _require(int(self.horizon) >= 1, f"horizon must be >= 1, got {self.horizon}")


@dataclass(frozen=True)
class SensorParams:
    alpha: float = math.radians(86.0)
    beta: float = math.radians(57.0)
    max_range: float = 1.5
    min_range: float = 0.5
    lateral_clamp: float = 1.0
    ground_mask: float = 0.2
    ray_grid: tuple[int, int] = (33, 49)  # (rows, cols); odd so the boresight ray exists
    voxel_size: float = 0.05
    noise_sigma: float = 0.0
    optical_offset: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self):
        object.__setattr__(self, "ray_grid", tuple(int(v) for v in self.ray_grid))
        object.__setattr__(self, "optical_offset", tuple(float(v) for v in self.optical_offset))
        _require(0.0 < self.alpha < math.pi, f"alpha must lie in (0, pi), got {self.alpha}")
        _require(0.0 < self.beta < math.pi, f"beta must lie in (0, pi), got {self.beta}")
        _require(
            0.0 < self.min_range < self.max_range,
            f"need 0 < min_range < max_range, got {self.min_range}, {self.max_range}",
        )
        _require(self.lateral_clamp > 0.0, "lateral_clamp must be positive")
        _require(len(self.ray_grid) == 2 and min(self.ray_grid) >= 2, "ray_grid must be at least (2, 2)")
        _require(self.voxel_size > 0.0, "voxel_size must be positive")
        _require(self.noise_sigma >= 0.0, "noise_sigma must be non-negative")
        _require(len(self.optical_offset) == 3, "optical_offset needs three components")


@dataclass(frozen=True)
class VehicleParams:
    """Ideal waypoint tracker limits."""

    max_speed: float = 1.0
    max_yaw_rate: float = 1.0
    dt: float = 0.1
    arrival_tol: float = 0.05
    heading_tol: float = 0.05

    def __post_init__(self):
        for name in ("max_speed", "max_yaw_rate", "dt", "arrival_tol", "heading_tol"):
            _require(getattr(self, name) > 0.0, f"{name} must be positive")

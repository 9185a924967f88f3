"""Deterministic simulator for map-free structure inspection and exploration."""

from .geometry import FrameTag, PointCloud, Pose
from .metrics import MetricsReport, MissionLog, build_report, export
from .mission import MissionState, Mode, mission_tick, run_mission
from .world import Scenario, load_scenario, scenario_from_mapping

__all__ = [
    "FrameTag",
    "MetricsReport",
    "MissionLog",
    "MissionState",
    "Mode",
    "PointCloud",
    "Pose",
    "Scenario",
    "build_report",
    "export",
    "load_scenario",
    "mission_tick",
    "run_mission",
    "scenario_from_mapping",
]

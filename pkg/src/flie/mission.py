"""Mission state machine: inspect a structure, explore for the next one.

Every tick senses at the settled agent pose, plans one commanded pose, then
lets the ideal tracker fly there. The mode stored in a tick record is the
mode the tick started in; any transition it caused is in the events.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DegenerateView, StepBudgetExceeded
from .exploration import (
    ExplorationState,
    Outcome,
    PoseRepository,
    Tier,
    begin_exploration,
    begin_tier,
    explore_step,
)
from .geometry import Pose, wrap_angle
from .inspection import StepKind, inspection_step
from .metrics import MissionLog, TickRecord, accumulate_cloud
from .params import VehicleParams
from .recognition import RecognizerState, after_step, capture_query, similarity, update_threshold, visited_scene
from .sensor import SensorFrame, sense
from .world import Scenario


class Mode(str, enum.Enum):
    INSPECT = "INSPECT"
    EXPLORE_E1 = "EXPLORE_E1"
    EXPLORE_E2 = "EXPLORE_E2"
    EXPLORE_E3 = "EXPLORE_E3"
    RETURN_TO_BASE = "RETURN_TO_BASE"
    DONE = "DONE"


TIER_MODE = {Tier.E1: Mode.EXPLORE_E1, Tier.E2: Mode.EXPLORE_E2, Tier.E3: Mode.EXPLORE_E3}

ALLOWED_TRANSITIONS = {
    Mode.INSPECT: {Mode.EXPLORE_E1, Mode.EXPLORE_E2, Mode.RETURN_TO_BASE},
    Mode.EXPLORE_E1: {Mode.INSPECT, Mode.EXPLORE_E2},
    Mode.EXPLORE_E2: {Mode.INSPECT, Mode.EXPLORE_E3},
    Mode.EXPLORE_E3: {Mode.INSPECT, Mode.DONE},
    Mode.RETURN_TO_BASE: {Mode.EXPLORE_E3},
    Mode.DONE: set(),
}


class Termination(str, enum.Enum):
    RUNNING = "RUNNING"
    EXHAUSTED = "EXHAUSTED"
    STEP_BUDGET_EXCEEDED = "STEP_BUDGET_EXCEEDED"


@dataclass
class MissionState:
    mode: Mode
    agent: Pose
    base_pose: Pose
    recognizer: RecognizerState
    repo: PoseRepository = field(default_factory=PoseRepository)
    explorer: ExplorationState | None = None
    step: int = 0
    log: MissionLog = field(default_factory=MissionLog)
    rng: np.random.Generator | None = None
    repos: list[PoseRepository] = field(default_factory=list)
    inspected_ids: set = field(default_factory=set)
    phase_steps: int = 0
    awaiting_gain: bool = False
    termination: Termination = Termination.RUNNING

    @property
    def num_view_poses(self) -> int:
        return sum(len(r) for r in self.repos)

    @classmethod
    def initial(cls, scene: Scenario, rng: np.random.Generator | None = None) -> "MissionState":
        p = scene.params
        repo = PoseRepository()
        return cls(
            mode=Mode.INSPECT,
            agent=scene.start_pose,
            base_pose=scene.start_pose,
            recognizer=RecognizerState.initial(p.threshold_init, p.horizon, p.alpha),
            repo=repo,
            repos=[repo],
            log=MissionLog(voxel_size=scene.sensor.voxel_size),
            rng=rng if rng is not None else np.random.default_rng(scene.seed),
        )


# -- vehicle -----------------------------------------------------------------


def vehicle_step(agent: Pose, target: Pose, params: VehicleParams) -> Pose:
    """One tracker update: straight-line move and shortest-way yaw, both rate limited."""
    p, t = agent.position, target.position
    delta = t - p
    dist = float(np.linalg.norm(delta))
    reach = params.max_speed * params.dt
    pos = t if dist <= reach else p + delta * (reach / dist)

    dyaw = wrap_angle(target.yaw - agent.yaw)
    turn = params.max_yaw_rate * params.dt
    yaw = target.yaw if abs(dyaw) <= turn else agent.yaw + math.copysign(turn, dyaw)
    return Pose.at(pos, yaw)


def step_bound(agent: Pose, target: Pose, params: VehicleParams) -> int:
    dist = float(np.linalg.norm(target.position - agent.position))
    dyaw = abs(wrap_angle(target.yaw - agent.yaw))
    return math.ceil(dist / (params.max_speed * params.dt)) + math.ceil(dyaw / (params.max_yaw_rate * params.dt))


def settle(agent: Pose, target: Pose, params: VehicleParams) -> tuple[Pose, int]:
    """Step the tracker until it sits exactly on ``target``; returns (pose, updates)."""
    limit = step_bound(agent, target, params) + 2
    n = 0
    while agent != target:
        if n > limit:
            raise RuntimeError("tracker failed to settle")
        agent = vehicle_step(agent, target, params)
        n += 1
    return agent, n


# -- tick --------------------------------------------------------------------


def _transition(state: MissionState, new: Mode, reason: str) -> None:
    old = state.mode
    if new not in ALLOWED_TRANSITIONS[old]:
        raise AssertionError(f"illegal transition {old.value} -> {new.value}")
    state.log.emit("TRANSITION", state.step, src=old.value, dst=new.value, reason=reason)
    state.mode = new


def _start_inspection_phase(state: MissionState, fresh_structure: bool) -> None:
    """Reset per-loop bookkeeping when a sweep hands over to inspection."""
    if fresh_structure:
        state.repo = PoseRepository()
        state.repos.append(state.repo)
        # The next INSPECT tick captures a new query view.
        state.recognizer = replace(state.recognizer, query=None)
    state.phase_steps = 0


def _revisit(state: MissionState, scene: Scenario, frame: SensorFrame) -> bool:
    ids = frame.signature.landmark_ids
    if not ids:
        return False
    return len(ids & state.inspected_ids) / len(ids) >= scene.revisit_similarity


def _explore(state: MissionState, scene: Scenario, frame: SensorFrame | None, rec: TickRecord | None) -> Pose:
    """Feed the last candidate's gain to the sweep and return the next command."""
    ex = state.explorer
    gain = None
    if state.awaiting_gain and frame is not None:
        gain = len(frame.cloud)
        if gain and ex.tier in (Tier.E2, Tier.E3) and _revisit(state, scene, frame):
            state.log.emit("REVISIT", state.step, tier=ex.tier.value, raw_gain=gain)
            gain = 0
        state.log.emit("GAIN", state.step, tier=ex.tier.value, index=ex.k, yaw=state.agent.yaw, gain=gain)
        if rec is not None:
            rec.gain = gain
    state.awaiting_gain = False

    alpha = scene.params.alpha
    while True:
        result, ex = explore_step(ex, state.repo, gain, alpha)
        state.explorer = ex
        gain = None
        if isinstance(result, Pose):
            if ex.k < ex.m:
                state.awaiting_gain = True
                return result
            state.log.emit("SELECT", state.step, tier=ex.tier.value, index=ex.gains.index(max(ex.gains)))
            fresh = ex.tier != Tier.E1
            _transition(state, Mode.INSPECT, f"{ex.tier.value} found structure")
            _start_inspection_phase(state, fresh)
            return result
        if result == Outcome.TIER_CHANGE:
            state.log.emit("TIER", state.step, tier=ex.tier.value, candidates=ex.m)
            _transition(state, TIER_MODE[ex.tier], "sweep found nothing")
            continue
        state.log.emit("TIER", state.step, tier=Tier.EXHAUSTED.value, candidates=0)
        _transition(state, Mode.DONE, "exploration exhausted")
        state.termination = Termination.EXHAUSTED
        return state.agent


def _begin_sweep(state: MissionState, scene: Scenario, explorer: ExplorationState, reason: str) -> Pose:
    state.explorer = explorer
    state.awaiting_gain = False
    state.log.emit("TIER", state.step, tier=explorer.tier.value, candidates=explorer.m)
    _transition(state, TIER_MODE[explorer.tier], reason)
    return _explore(state, scene, None, None)


def _inspect(state: MissionState, scene: Scenario, frame: SensorFrame, rec: TickRecord) -> Pose:
    params = scene.params
    if frame.cloud.empty:
        engaged = state.phase_steps > 0
        ex = begin_exploration(state.agent, params.alpha, state.repo, engaged)
        return _begin_sweep(state, scene, ex, "surface lost" if engaged else "nothing in view")

    sig = frame.signature
    if not state.repo.poses:
        state.repo.append(state.agent)
    rs = state.recognizer
    # A reference view without landmarks could never be matched; wait for one.
    if rs.query is None and len(sig):
        rs = capture_query(rs, sig)
        state.log.emit("QUERY", state.step, landmarks=len(sig))
    score = similarity(rs.query, sig) if rs.query is not None and len(sig) else None
    visited = score is not None and visited_scene(rs, sig)
    if score is not None:
        rs = update_threshold(rs, score)
    rec.score, rec.threshold = score, rs.threshold
    state.inspected_ids |= sig.landmark_ids

    try:
        plan = inspection_step(state.agent, frame.cloud, visited, params)
    except DegenerateView:
        state.log.emit("DEGENERATE", state.step)
        state.recognizer = after_step(rs, score)
        return state.agent
    rec.poi_distance = plan.distance

    if plan.kind == StepKind.TOP_REACHED:
        state.recognizer = rs
        state.log.emit("TOP_REACHED", state.step, z=plan.next_pose.z, cloud_top=float(plan.poi[2]))
        _transition(state, Mode.RETURN_TO_BASE, "top reached")
        return state.base_pose

    if plan.kind == StepKind.ASCEND:
        state.repo.fix_base()
        state.log.emit("ASCEND", state.step, score=score, threshold=rs.threshold, dz=plan.overlap_v)
    state.repo.append(plan.next_pose)
    rs = after_step(rs, score)
    if plan.kind == StepKind.ASCEND:
        rs = replace(rs, query=None)
    state.recognizer = rs
    state.phase_steps += 1
    return plan.next_pose


def mission_tick(state: MissionState, scene: Scenario) -> MissionState:
    """One sense, plan, move cycle. Raises StepBudgetExceeded at the budget."""
    if state.mode == Mode.DONE:
        raise ValueError("mission already finished")
    state.step += 1
    frame = sense(scene, state.agent, scene.sensor, state.rng)
    accumulate_cloud(state.log, frame.cloud, state.agent)
    rec = TickRecord(
        step=state.step,
        mode=state.mode.value,
        commanded=state.agent,
        actual=state.agent,
        sense_pose=state.agent,
        cloud_size=len(frame.cloud),
        raw_count=frame.raw_count,
        threshold=state.recognizer.threshold,
    )
    state.log.records.append(rec)

    if state.mode == Mode.INSPECT:
        target = _inspect(state, scene, frame, rec)
    elif state.mode == Mode.RETURN_TO_BASE:
        ex = begin_tier(Tier.E3, state.agent, scene.params.alpha, state.repo)
        target = _begin_sweep(state, scene, ex, "at base")
    else:
        target = _explore(state, scene, frame, rec)

    state.agent, _ = settle(state.agent, target, scene.vehicle)
    rec.commanded, rec.actual = target, state.agent
    rec.merged_size = len(state.log._merged)

    if state.mode != Mode.DONE and state.step >= scene.max_steps:
        state.log.emit("BUDGET", state.step, max_steps=scene.max_steps, mode=state.mode.value)
        state.mode = Mode.DONE
        state.termination = Termination.STEP_BUDGET_EXCEEDED
        raise StepBudgetExceeded(f"mission did not finish within {scene.max_steps} ticks")
    return state


def run_mission(scene: Scenario, max_steps: int | None = None) -> tuple[MissionState, MissionLog]:
    """Tick until DONE. A blown budget is recorded in ``state.termination``."""
    if max_steps is not None:
        scene = replace(scene, max_steps=int(max_steps))
    state = MissionState.initial(scene)
    state.log.emit("START", 0, pose=list(state.agent.as_tuple()), scenario=scene.name)
    while state.mode != Mode.DONE:
        try:
            mission_tick(state, scene)
        except StepBudgetExceeded:
            break
    state.log.emit("END", state.step, termination=state.termination.value)
    return state, state.log

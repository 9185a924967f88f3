"""Tiered search for structures: forward sweep, full sweep, backtracking.

E1 and E2 yaw the agent in place by one horizontal field of view at a time;
E3 retraces the base level of the last inspection loop in reverse while
looking away from the structure. Every tier first visits all of its
candidates, then returns the one that saw the most points.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

from .errors import IndexOutOfRange
from .geometry import Pose, round_half_away, wrap_angle


class Tier(str, enum.Enum):
    E1 = "E1"
    E2 = "E2"
    E3 = "E3"
    EXHAUSTED = "EXHAUSTED"


class Outcome(str, enum.Enum):
    TIER_CHANGE = "TIER_CHANGE"
    EXHAUSTED = "EXHAUSTED"


NEXT_TIER = {Tier.E1: Tier.E2, Tier.E2: Tier.E3, Tier.E3: Tier.EXHAUSTED}


@dataclass
class PoseRepository:
    """Commanded inspection poses in command order.

    ``poses[0]`` is the pose inspection started from. ``base_loop_len`` is
    the index of the last pose commanded on the base level; it is fixed at
    the first ascent and never changes afterwards.
    """

    poses: list[Pose] = field(default_factory=list)
    base_loop_len: int | None = None

    def append(self, pose: Pose) -> None:
        self.poses.append(pose)

    def fix_base(self) -> None:
        if self.base_loop_len is None:
            self.base_loop_len = max(len(self.poses) - 1, 0)

    @property
    def j(self) -> int:
        if self.base_loop_len is not None:
            return self.base_loop_len
        return max(len(self.poses) - 1, 0)

    def __len__(self) -> int:
        return len(self.poses)


@dataclass
class ExplorationState:
    tier: Tier
    candidates: list[Pose]
    k: int = 0
    gains: list[int] = field(default_factory=list)
    engaged: bool = False

    @property
    def m(self) -> int:
        return len(self.candidates)


def _sweep(pose: Pose, alpha: float, m: int) -> list[float]:
    out = []
    psi = pose.yaw
    for _ in range(m):
        psi = wrap_angle(psi + alpha)
        out.append(psi)
    return out


def e1_headings(pose: Pose, alpha: float) -> list[float]:
    """Forward-sector sweep: ``round(pi / (alpha / 2))`` steps of ``alpha``."""
    return _sweep(pose, alpha, round_half_away(math.pi / (0.5 * alpha)))


def e2_headings(pose: Pose, alpha: float) -> list[float]:
    """Full sweep: ``round(2 pi / alpha)`` steps of ``alpha``."""
    return _sweep(pose, alpha, round_half_away(2 * math.pi / alpha))


def e3_backtrack(repo: PoseRepository, k: int) -> Pose:
    """k-th backtracking pose: base-loop pose ``j - k`` turned around."""
    j = repo.j
    if not 1 <= k <= j:
        raise IndexOutOfRange(f"backtrack index {k} outside 1..{j}")
    p = repo.poses[j - k]
    return Pose(p.x, p.y, p.z, math.pi + p.yaw)


def tier_candidates(tier: Tier, pose: Pose, alpha: float, repo: PoseRepository) -> list[Pose]:
    if tier == Tier.E1:
        return [pose.with_yaw(h) for h in e1_headings(pose, alpha)]
    if tier == Tier.E2:
        return [pose.with_yaw(h) for h in e2_headings(pose, alpha)]
    if tier == Tier.E3:
        return [e3_backtrack(repo, k) for k in range(1, repo.j + 1)]
    return []


def begin_exploration(pose: Pose, alpha: float, repo: PoseRepository, engaged: bool) -> ExplorationState:
    tier = Tier.E1 if engaged else Tier.E2
    return ExplorationState(tier, tier_candidates(tier, pose, alpha, repo), engaged=engaged)


def begin_tier(tier: Tier, pose: Pose, alpha: float, repo: PoseRepository, engaged: bool = False) -> ExplorationState:
    return ExplorationState(tier, tier_candidates(tier, pose, alpha, repo), engaged=engaged)


def best_candidate(state: ExplorationState) -> int | None:
    """Index of the first candidate with the largest positive gain."""
    best = None
    for i, g in enumerate(state.gains):
        if g > 0 and (best is None or g > state.gains[best]):
            best = i
    return best


def explore_step(
    state: ExplorationState,
    repo: PoseRepository,
    gain: int | None,
    alpha: float = math.radians(86.0),
):
    """Advance a sweep by one candidate.

    ``gain`` is the point count seen at the candidate visited last (``None``
    when no candidate has been visited yet in this tier). Returns
    ``(next, state)`` where ``next`` is the next pose to visit, the chosen
    pose once the sweep is complete, ``Outcome.TIER_CHANGE`` (``state`` is
    then the freshly started next tier) or ``Outcome.EXHAUSTED``.
    """
    if state.tier == Tier.EXHAUSTED:
        return Outcome.EXHAUSTED, state
    if gain is not None:
        if state.k >= state.m:
            raise ValueError("sweep already complete")
        state = replace(state, gains=state.gains + [int(gain)], k=state.k + 1)
    if state.k < state.m:
        return state.candidates[state.k], state
    best = best_candidate(state)
    if best is not None:
        return state.candidates[best], state
    nxt = NEXT_TIER[state.tier]
    if nxt == Tier.EXHAUSTED:
        return Outcome.EXHAUSTED, replace(state, tier=Tier.EXHAUSTED)
    # In-place sweeps always have candidates, so only E3 can start from nothing.
    origin = state.candidates[-1] if state.candidates else Pose(0.0, 0.0, 0.0)
    return Outcome.TIER_CHANGE, begin_tier(nxt, origin, alpha, repo, state.engaged)

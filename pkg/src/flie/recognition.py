"""Loop-closure detection with a running-mean similarity threshold.

A scene is summarised by the set of landmark ids the camera can see. The
score of a candidate view is the fraction of its ids also present in the
query view captured at the start of the current inspection loop; the view
counts as revisited when the score reaches the mean of the last ``N``
scores.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .errors import NoDescriptors
from .geometry import Pose


@dataclass(frozen=True)
class SceneSignature:
    landmark_ids: frozenset = frozenset()
    pose_at_capture: Pose | None = None

    def __post_init__(self):
        object.__setattr__(self, "landmark_ids", frozenset(int(i) for i in self.landmark_ids))

    def __len__(self) -> int:
        return len(self.landmark_ids)


@dataclass(frozen=True)
class RecognizerState:
    threshold: float = 0.6
    horizon: int = 6
    query: SceneSignature | None = None
    score_window: tuple[float, ...] = ()
    warmup_count: int = 0
    gate_steps: int = 5
    steps_since_capture: int = 0
    departed: bool = False

    @classmethod
    def initial(cls, threshold: float = 0.6, horizon: int = 6, alpha: float = math.radians(86)):
        return cls(threshold=threshold, horizon=int(horizon), gate_steps=math.ceil(2 * math.pi / alpha))

    @property
    def warmed_up(self) -> bool:
        return self.warmup_count >= self.horizon


def similarity(query: SceneSignature, candidate: SceneSignature) -> float:
    """Shared ids over the candidate's id count."""
    if len(candidate.landmark_ids) == 0:
        raise NoDescriptors("candidate view has no descriptors")
    return len(query.landmark_ids & candidate.landmark_ids) / len(candidate.landmark_ids)


def update_threshold(state: RecognizerState, score: float) -> RecognizerState:
    """Push ``score``; once ``N`` scores have arrived the threshold is their mean."""
    if not 0.0 <= score <= 1.0:
        raise ValueError(f"score must lie in [0, 1], got {score}")
    window = (state.score_window + (float(score),))[-state.horizon :]
    count = state.warmup_count + 1
    threshold = state.threshold
    if count >= state.horizon:
        threshold = math.fsum(window) / len(window)
    return replace(state, score_window=window, warmup_count=count, threshold=threshold)


def capture_query(state: RecognizerState, signature: SceneSignature) -> RecognizerState:
    """Start a new inspection loop with ``signature`` as its reference view."""
    return replace(state, query=signature, steps_since_capture=0, departed=False)


def gate_open(state: RecognizerState) -> bool:
    """The agent has moved away from the query view since it was captured."""
    return state.departed and state.steps_since_capture >= state.gate_steps


def visited_scene(state: RecognizerState, candidate: SceneSignature) -> bool:
    if state.query is None:
        raise ValueError("recognizer has no query view")
    score = similarity(state.query, candidate)
    shared = len(state.query.landmark_ids & candidate.landmark_ids)
    return shared > 0 and score >= state.threshold and gate_open(state)


def after_step(state: RecognizerState, score: float | None) -> RecognizerState:
    """Book-keeping after an inspection step was commanded from this view."""
    departed = state.departed or not score
    return replace(state, steps_since_capture=state.steps_since_capture + 1, departed=departed)

"""Task agents: skill, lifecycle state, performance record and rewiring choices.

The selection helpers accept any real-valued performances (floats or
``Fraction``); the simulation passes exact fractions so that mean and
argmin/argmax comparisons never hinge on rounding.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from functools import cached_property
from fractions import Fraction
from numbers import Real
from typing import Iterable, Sequence

from .errors import InvariantViolation

DEFAULT_VALIDITY_THRESHOLD = 10


class AgentState(enum.Enum):
    UNCOMMITTED = "uncommitted"
    COMMITTED = "committed"
    ACTIVE = "active"


# (from, to) pairs an agent may move along
ALLOWED_TRANSITIONS = frozenset(
    {
        (AgentState.UNCOMMITTED, AgentState.COMMITTED),  # proposal sent
        (AgentState.COMMITTED, AgentState.ACTIVE),  # accepted
        (AgentState.COMMITTED, AgentState.UNCOMMITTED),  # rejected
        (AgentState.ACTIVE, AgentState.UNCOMMITTED),  # confirm or failure
    }
)


@dataclass(frozen=True)
class PerformanceTracker:
    """Lifetime count of team-entry attempts and acceptances."""

    attempts: int = 0
    successes: int = 0
    threshold: int = DEFAULT_VALIDITY_THRESHOLD

    def __post_init__(self) -> None:
        if not 0 <= self.successes <= self.attempts:
            raise ValueError(f"need 0 <= successes <= attempts, got {self.successes}/{self.attempts}")
        if self.threshold < 0:
            raise ValueError(f"threshold must be >= 0, got {self.threshold}")

    @property
    def valid(self) -> bool:
        return self.attempts >= self.threshold

    @cached_property
    def _ratio(self) -> Fraction | None:
        if self.attempts == 0:
            return None
        return Fraction(self.successes, self.attempts)

    def ratio(self) -> Fraction | None:
        """Exact success ratio, ``None`` before the first attempt."""
        return self._ratio

    def record_outcome(self, accepted: bool) -> "PerformanceTracker":
        return replace(self, attempts=self.attempts + 1, successes=self.successes + int(accepted))


def performance(t: PerformanceTracker) -> float | None:
    """``successes / attempts``, or ``None`` when there is no data yet."""
    if t.attempts == 0:
        return None
    return t.successes / t.attempts


def reported_performance(t: PerformanceTracker) -> Fraction:
    """Value an agent reports to a neighbour's query; no data reports as 0."""
    r = t.ratio()
    return Fraction(0) if r is None else r


def record_outcome(t: PerformanceTracker, accepted: bool) -> PerformanceTracker:
    return t.record_outcome(accepted)


def should_adapt(self_perf: PerformanceTracker, neighbor_perfs: Sequence[Real]) -> bool:
    """Adaptation trigger.

    True when the tracker is valid, the agent has at least one neighbour and
    its own ratio is strictly below the mean of the neighbours' reports.
    """
    if not self_perf.valid or not neighbor_perfs:
        return False
    own = self_perf.ratio()
    if own is None:
        return False
    return own < sum(neighbor_perfs) / len(neighbor_perfs)


def _pick(pairs: Iterable[tuple[int, Real]], best: str) -> int:
    pairs = list(pairs)
    if not pairs:
        raise ValueError("no candidates to choose from")
    if best == "min":
        return min(pairs, key=lambda p: (p[1], p[0]))[0]
    # highest value first, lowest id on ties
    return min(pairs, key=lambda p: (-p[1], p[0]))[0]


def select_removal(neighbor_perfs: Iterable[tuple[int, Real]]) -> int:
    """Neighbour with the lowest performance (lowest id on ties)."""
    return _pick(neighbor_perfs, "min")


def select_referrer(neighbor_perfs: Iterable[tuple[int, Real]]) -> int:
    """Neighbour with the highest performance (lowest id on ties)."""
    return _pick(neighbor_perfs, "max")


def select_referral(
    referrer_neighbor_perfs: Iterable[tuple[int, Real]],
    requester: int,
    requester_neighbors: Iterable[int],
) -> int | None:
    """Best neighbour of the referrer that the requester is not yet linked to.

    Returns ``None`` when every candidate is the requester or already one of
    its neighbours.
    """
    excluded = set(requester_neighbors)
    excluded.add(requester)
    candidates = [(a, y) for a, y in referrer_neighbor_perfs if a not in excluded]
    if not candidates:
        return None
    return _pick(candidates, "max")


@dataclass
class Agent:
    id: int
    skill: int
    state: AgentState = AgentState.UNCOMMITTED
    task: int | None = None
    perf: PerformanceTracker = PerformanceTracker()

    def transition(self, new: AgentState, task: int | None = None) -> AgentState:
        """Move to ``new`` (bound to ``task`` unless uncommitted); returns the old state."""
        old = self.state
        if (old, new) not in ALLOWED_TRANSITIONS:
            raise InvariantViolation(f"agent {self.id}: illegal transition {old.value} -> {new.value}")
        if new is AgentState.UNCOMMITTED:
            self.task = None
        elif new is AgentState.COMMITTED:
            if task is None:
                raise InvariantViolation(f"agent {self.id}: commit without a task")
            self.task = task
        elif task is not None and task != self.task:
            raise InvariantViolation(f"agent {self.id}: activated on task {task} while committed to {self.task}")
        self.state = new
        return old

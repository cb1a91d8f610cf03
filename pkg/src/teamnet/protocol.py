"""Team-formation messaging: tasks, teams, the scheduler rules and the referral exchange.

Message flow per task::

    manager  --propose-->         scheduler      (new task)
    scheduler --propose-->        all agents     (broadcast)
    agent    --acceptproposal-->  scheduler      (application)
    scheduler --acceptproposal/rejectproposal--> agent
    scheduler --confirm/failure-->               every team member

and for network adaptation::

    agent --queryif--> neighbour --informif--> agent
    agent --proxy--> best neighbour --referralreply--> agent
"""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Mapping, Sequence

from .agent_model import (
    PerformanceTracker,
    reported_performance,
    select_referral,
    select_referrer,
    select_removal,
    should_adapt,
)
from .errors import ProtocolViolation
from .social_graph import Graph

MANAGER = "manager"
SCHEDULER = "scheduler"
BROADCAST = "all"


class Performative(enum.Enum):
    PROPOSE = "propose"
    ACCEPT_PROPOSAL = "acceptproposal"
    REJECT_PROPOSAL = "rejectproposal"
    CONFIRM = "confirm"
    FAILURE = "failure"
    QUERY_IF = "queryif"
    INFORM_IF = "informif"
    PROXY = "proxy"
    REFERRAL_REPLY = "referralreply"


# payload keys each performative must carry
PAYLOAD_KEYS: dict[Performative, frozenset[str]] = {
    Performative.PROPOSE: frozenset({"task", "skills"}),
    Performative.ACCEPT_PROPOSAL: frozenset({"task", "skill"}),
    Performative.REJECT_PROPOSAL: frozenset({"task", "reason"}),
    Performative.CONFIRM: frozenset({"task"}),
    Performative.FAILURE: frozenset({"task"}),
    Performative.QUERY_IF: frozenset(),
    Performative.INFORM_IF: frozenset({"performance"}),
    Performative.PROXY: frozenset({"requester"}),
    Performative.REFERRAL_REPLY: frozenset({"referral"}),
}

Party = int | str


@dataclass(frozen=True)
class Message:
    performative: Performative
    sender: Party
    receiver: Party
    payload: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        expected = PAYLOAD_KEYS[self.performative]
        if set(self.payload) != expected:
            raise ProtocolViolation(
                f"{self.performative.value} payload must have keys {sorted(expected)}, got {sorted(self.payload)}"
            )

    def to_event(self, tick: int) -> dict[str, Any]:
        event: dict[str, Any] = {
            "tick": tick,
            "kind": "msg",
            "performative": self.performative.value,
            "sender": self.sender,
            "receiver": self.receiver,
        }
        for key in sorted(self.payload):
            value = self.payload[key]
            if isinstance(value, Fraction):
                value = float(value)
            elif isinstance(value, tuple):
                value = list(value)
            event[key] = value
        return event


@dataclass(frozen=True)
class Task:
    id: int
    required_skills: tuple[int, ...]
    announced_at: int
    deadline: int

    def __post_init__(self) -> None:
        if not self.required_skills:
            raise ValueError("a task needs at least one required skill")
        if self.deadline <= self.announced_at:
            raise ValueError(f"deadline {self.deadline} must be after announcement {self.announced_at}")


@dataclass
class Team:
    """Slots of one task and the agents filling them (slot index -> agent)."""

    task: Task
    filled: dict[int, int] = field(default_factory=dict)

    @property
    def members(self) -> set[int]:
        return set(self.filled.values())

    def is_empty(self) -> bool:
        return not self.filled

    def is_complete(self) -> bool:
        return len(self.filled) == len(self.task.required_skills)

    def open_slot(self, skill: int) -> int | None:
        """Lowest unfilled slot index asking for ``skill``."""
        for idx, s in enumerate(self.task.required_skills):
            if s == skill and idx not in self.filled:
                return idx
        return None

    def fill(self, slot: int, agent: int) -> None:
        if slot in self.filled:
            raise ProtocolViolation(f"task {self.task.id}: slot {slot} already filled")
        if agent in self.filled.values():
            raise ProtocolViolation(f"task {self.task.id}: agent {agent} already on the team")
        self.filled[slot] = agent


class TaskGenerator:
    """Seeded task source; each announcement tick draws from its own stream."""

    def __init__(self, seed: int, n_skills: int, task_size: int, timeout: int, batch_size: int = 1):
        self.seed = seed
        self.n_skills = n_skills
        self.task_size = task_size
        self.timeout = timeout
        self.batch_size = batch_size
        self.next_id = 0

    def announce(self, tick: int) -> list[Task]:
        rng = random.Random(f"tasks/{self.seed}/{tick}")
        tasks = []
        for _ in range(self.batch_size):
            skills = tuple(rng.randint(1, self.n_skills) for _ in range(self.task_size))
            tasks.append(Task(self.next_id, skills, tick, tick + self.timeout))
            self.next_id += 1
        return tasks


def manager_announce(tick: int, gen: TaskGenerator, interval: int) -> list[Task]:
    """New tasks for ``tick``; empty unless ``tick`` is a multiple of ``interval``."""
    if tick % interval:
        return []
    return gen.announce(tick)


def announcement_messages(task: Task) -> list[Message]:
    payload = {"task": task.id, "skills": task.required_skills}
    return [
        Message(Performative.PROPOSE, MANAGER, SCHEDULER, payload),
        Message(Performative.PROPOSE, SCHEDULER, BROADCAST, payload),
    ]


@dataclass(frozen=True)
class Verdict:
    accepted: bool
    reason: str | None = None
    slot: int | None = None


def eligibility(g: Graph, team: Team, candidate: int, skill: int) -> Verdict:
    """Connected-team rule: an open slot for ``skill`` and either an empty team
    or an edge from ``candidate`` to a current member."""
    if skill not in team.task.required_skills:
        raise ProtocolViolation(f"task {team.task.id} does not require skill {skill} (candidate {candidate})")
    slot = team.open_slot(skill)
    if slot is None:
        return Verdict(False, "no_open_slot")
    if team.is_empty() or any(g.has_edge(candidate, m) for m in team.filled.values()):
        return Verdict(True, slot=slot)
    return Verdict(False, "not_connected")


def application(agent: int, task: Task, skill: int) -> Message:
    return Message(Performative.ACCEPT_PROPOSAL, agent, SCHEDULER, {"task": task.id, "skill": skill})


@dataclass
class RoundResult:
    accepts: list[Message] = field(default_factory=list)
    rejects: list[Message] = field(default_factory=list)
    # replies in processing order, each paired with its application
    replies: list[tuple[Message, Message]] = field(default_factory=list)
    violations: list[str] = field(default_factory=list)


def scheduler_round(g: Graph, open_teams: Mapping[int, Team], proposals: Sequence[Message]) -> RoundResult:
    """Answer every application exactly once, growing ``open_teams`` in place.

    Applications are handled by ascending task id then agent id, each against
    the team as already grown earlier in the same round.
    """
    result = RoundResult()
    for prop in sorted(proposals, key=lambda m: (m.payload["task"], m.sender)):
        if prop.performative is not Performative.ACCEPT_PROPOSAL or prop.receiver != SCHEDULER:
            raise ProtocolViolation(f"not an application: {prop}")
        task_id = prop.payload["task"]
        agent = prop.sender
        team = open_teams.get(task_id)
        if team is None:
            verdict = Verdict(False, "stale")
        else:
            try:
                verdict = eligibility(g, team, agent, prop.payload["skill"])
            except ProtocolViolation as exc:
                result.violations.append(str(exc))
                verdict = Verdict(False, "protocol_violation")
        if verdict.accepted:
            team.fill(verdict.slot, agent)
            reply = Message(Performative.ACCEPT_PROPOSAL, SCHEDULER, agent, {"task": task_id, "skill": prop.payload["skill"]})
            result.accepts.append(reply)
        else:
            reply = Message(Performative.REJECT_PROPOSAL, SCHEDULER, agent, {"task": task_id, "reason": verdict.reason})
            result.rejects.append(reply)
        result.replies.append((prop, reply))
    return result


@dataclass
class ResolveResult:
    confirms: list[Message] = field(default_factory=list)
    failures: list[Message] = field(default_factory=list)
    succeeded: list[Team] = field(default_factory=list)
    failed: list[Team] = field(default_factory=list)


def scheduler_tick(tick: int, open_teams: dict[int, Team]) -> ResolveResult:
    """Close complete teams (confirm) and expired ones (failure); both are removed
    from ``open_teams``. Members are listed in ascending id."""
    result = ResolveResult()
    for task_id in sorted(open_teams):
        team = open_teams[task_id]
        if team.is_complete():
            kind, bucket, done = Performative.CONFIRM, result.confirms, result.succeeded
        elif team.task.deadline <= tick:
            kind, bucket, done = Performative.FAILURE, result.failures, result.failed
        else:
            continue
        for member in sorted(team.members):
            bucket.append(Message(kind, SCHEDULER, member, {"task": task_id}))
        done.append(team)
        del open_teams[task_id]
    return result


@dataclass
class Exchange:
    """Outcome of one agent's query/referral exchange."""

    messages: list[Message] = field(default_factory=list)
    triggered: bool = False
    removed: int | None = None
    referrer: int | None = None
    referral: int | None = None

    @property
    def rewire(self) -> tuple[int, int] | None:
        """``(remove, add)`` when a swap should be applied."""
        if self.referral is None:
            return None
        return self.removed, self.referral


def adaptation_exchange(
    agent: int, g: Graph, perfs: Sequence[PerformanceTracker], record: bool = True
) -> Exchange:
    """Query neighbours, test the trigger and, if it fires, ask the best
    neighbour for a referral. Does not mutate ``g``.

    With ``record=False`` the decision is the same but no messages are built.
    """
    ex = Exchange()
    nbrs = g.neighbors(agent)
    if not nbrs:
        return ex
    reports: list[tuple[int, Fraction]] = []
    for j in nbrs:
        reports.append((j, reported_performance(perfs[j])))
    if record:
        ex.messages.extend(Message(Performative.QUERY_IF, agent, j) for j in nbrs)
        ex.messages.extend(Message(Performative.INFORM_IF, j, agent, {"performance": y}) for j, y in reports)
    if not should_adapt(perfs[agent], [y for _, y in reports]):
        return ex
    ex.triggered = True
    ex.removed = select_removal(reports)
    ex.referrer = select_referrer(reports)
    referrer_reports = [(m, reported_performance(perfs[m])) for m in g.neighbors(ex.referrer)]
    ex.referral = select_referral(referrer_reports, agent, nbrs)
    if record:
        ex.messages.append(Message(Performative.PROXY, agent, ex.referrer, {"requester": agent}))
        ex.messages.append(Message(Performative.REFERRAL_REPLY, ex.referrer, agent, {"referral": ex.referral}))
    return ex

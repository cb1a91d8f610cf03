"""Deterministic tick loop.

Each tick runs the phases announce, propose, schedule, resolve, adapt and
sample in that order. Everything observable (event log, report, files) is a
function of the configuration alone.
"""

from __future__ import annotations

import csv
import logging
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

from . import export
from .agent_model import Agent, AgentState, PerformanceTracker, performance
from .config import SimConfig
from .errors import InvariantViolation, RewireError
from .protocol import (
    Performative,
    TaskGenerator,
    Team,
    adaptation_exchange,
    announcement_messages,
    application,
    manager_announce,
    scheduler_round,
    scheduler_tick,
)
from .sna_metrics import agent_metrics
from .social_graph import Graph, generate, is_team_connected

log = logging.getLogger(__name__)

PHASES = ("announce", "propose", "schedule", "resolve", "adapt", "sample")

EventSink = Callable[[dict[str, Any]], None]


@dataclass
class SimReport:
    n_agents: int
    tasks_announced: int = 0
    tasks_succeeded: int = 0
    tasks_failed: int = 0
    tasks_open: int = 0
    success_window: int = 50
    success_rate_series: list[float] = field(default_factory=list)
    rewires_performed: int = 0
    adaptations_aborted: int = 0
    connectivity_drifts: int = 0
    final_performance: list[float | None] = field(default_factory=list)
    final_edges: list[list[int]] = field(default_factory=list)

    @property
    def success_rate(self) -> float:
        """Share of resolved tasks that succeeded (0 when none resolved)."""
        resolved = self.tasks_succeeded + self.tasks_failed
        return self.tasks_succeeded / resolved if resolved else 0.0

    def final_quarter_rate(self) -> float:
        """Mean of the last quarter (rounded up) of the windowed success rates."""
        series = self.success_rate_series
        if not series:
            return 0.0
        tail = series[-max(1, -(-len(series) // 4)):]
        return sum(tail) / len(tail)

    def final_graph(self) -> Graph:
        return Graph(self.n_agents, [tuple(e) for e in self.final_edges])

    def to_dict(self) -> dict[str, Any]:
        return {
            "n_agents": self.n_agents,
            "tasks_announced": self.tasks_announced,
            "tasks_succeeded": self.tasks_succeeded,
            "tasks_failed": self.tasks_failed,
            "tasks_open": self.tasks_open,
            "success_rate": self.success_rate,
            "success_window": self.success_window,
            "success_rate_series": self.success_rate_series,
            "rewires_performed": self.rewires_performed,
            "adaptations_aborted": self.adaptations_aborted,
            "connectivity_drifts": self.connectivity_drifts,
            "final_performance": self.final_performance,
            "final_edges": self.final_edges,
        }


def assign_skills(n_agents: int, n_skills: int, seed: int) -> list[int]:
    """Balanced skill assignment (counts differ by at most one), shuffled by seed."""
    skills = [i % n_skills + 1 for i in range(n_agents)]
    random.Random(f"skills/{seed}").shuffle(skills)
    return skills


def windowed_rates(outcomes: list[bool | None], window: int) -> list[float]:
    """Success ratio per tumbling window of announced tasks; stops at the first
    window that still holds an unresolved task."""
    rates = []
    for start in range(0, len(outcomes) - window + 1, window):
        chunk = outcomes[start:start + window]
        if any(o is None for o in chunk):
            break
        rates.append(sum(chunk) / window)
    return rates


def sample_ticks(total_ticks: int, every: int) -> list[int]:
    """Ticks at which metrics are sampled: multiples of ``every`` in ``[0, total_ticks]``.

    The sample labelled ``total_ticks`` is taken after the last tick.
    """
    if every <= 0:
        return []
    return list(range(0, total_ticks + 1, every))


class Simulation:
    """One run of the team-formation society."""

    def __init__(
        self,
        config: SimConfig,
        out_dir: str | Path | None = None,
        sinks: list[EventSink] | None = None,
        check_invariants: bool = True,
    ):
        self.config = config.validate()
        self.out_dir = Path(out_dir) if out_dir is not None else None
        self.sinks: list[EventSink] = list(sinks or [])
        self.check = check_invariants
        cfg = self.config
        self.graph = generate(cfg.n_agents, cfg.topology, seed=cfg.seed)
        skills = assign_skills(cfg.n_agents, cfg.n_skills, cfg.seed)
        tracker = PerformanceTracker(threshold=cfg.validity_threshold)
        self.agents = [Agent(i, skills[i], perf=tracker) for i in range(cfg.n_agents)]
        self.generator = TaskGenerator(cfg.seed, cfg.n_skills, cfg.task_size, cfg.task_timeout, cfg.batch_size)
        self.teams: dict[int, Team] = {}
        self.outcomes: list[bool | None] = []
        self.report = SimReport(n_agents=cfg.n_agents, success_window=cfg.success_window)
        self.tick = 0
        self.phase = "init"
        self._metrics_fh = None
        self._metrics_writer = None
        self._sample_at = set(sample_ticks(cfg.total_ticks, cfg.metrics_sample_every)) if self.out_dir else set()

    # -- event helpers -------------------------------------------------

    def emit(self, event: dict[str, Any]) -> None:
        for sink in self.sinks:
            sink(event)

    def _msgs(self, messages) -> None:
        if self.sinks:
            for m in messages:
                self.emit(m.to_event(self.tick))

    def _move(self, agent: Agent, new: AgentState, task: int | None = None) -> None:
        prior_task = agent.task
        try:
            old = agent.transition(new, task)
        except InvariantViolation as exc:
            raise InvariantViolation(str(exc), self.tick, self.phase) from exc
        if self.sinks:
            self.emit({
                "tick": self.tick, "kind": "state", "agent": agent.id,
                "from": old.value, "to": new.value,
                "task": agent.task if agent.task is not None else prior_task,
            })

    def _fail(self, message: str) -> None:
        raise InvariantViolation(message, self.tick, self.phase)

    # -- phases --------------------------------------------------------

    def announce(self) -> None:
        for task in manager_announce(self.tick, self.generator, self.config.announce_interval):
            self.teams[task.id] = Team(task)
            self.outcomes.append(None)
            self.report.tasks_announced += 1
            if self.sinks:
                self.emit({"tick": self.tick, "kind": "task", "event": "announced", "task": task.id,
                           "skills": list(task.required_skills), "deadline": task.deadline})
            self._msgs(announcement_messages(task))

    def round_starts(self) -> bool:
        return self.tick % self.config.announce_interval == 0

    def round_ends(self) -> bool:
        return (self.tick + 1) % self.config.announce_interval == 0

    def propose(self) -> list:
        """Each uncommitted agent applies to the lowest-id open task that still
        has a free slot for its skill. Runs on round-start ticks only."""
        if not self.round_starts():
            return []
        proposals = []
        open_ids = sorted(self.teams)
        for agent in self.agents:
            if agent.state is not AgentState.UNCOMMITTED:
                continue
            target = next((t for t in open_ids if self.teams[t].open_slot(agent.skill) is not None), None)
            if target is None:
                continue
            self._move(agent, AgentState.COMMITTED, target)
            msg = application(agent.id, self.teams[target].task, agent.skill)
            self._msgs([msg])
            proposals.append(msg)
        return proposals

    def schedule(self, proposals: list) -> None:
        result = scheduler_round(self.graph, self.teams, proposals)
        for v in result.violations:
            log.warning("tick %d: %s", self.tick, v)
        for prop, reply in result.replies:
            agent = self.agents[prop.sender]
            accepted = reply.performative is Performative.ACCEPT_PROPOSAL
            agent.perf = agent.perf.record_outcome(accepted)
            self._msgs([reply])
            if accepted:
                task_id = reply.payload["task"]
                team = self.teams[task_id]
                if self.check and not is_team_connected(self.graph, team.members):
                    self._fail(f"task {task_id}: team {sorted(team.members)} not connected after accepting {agent.id}")
                self._move(agent, AgentState.ACTIVE, task_id)
            else:
                self._move(agent, AgentState.UNCOMMITTED)

    def resolve(self) -> None:
        result = scheduler_tick(self.tick, self.teams)
        for team, ok, msgs in (
            [(t, True, result.confirms) for t in result.succeeded]
            + [(t, False, result.failures) for t in result.failed]
        ):
            self.outcomes[team.task.id] = ok
            if ok:
                self.report.tasks_succeeded += 1
            else:
                self.report.tasks_failed += 1
            if self.sinks:
                self.emit({"tick": self.tick, "kind": "task", "event": "succeeded" if ok else "failed",
                           "task": team.task.id, "members": sorted(team.members)})
            self._msgs([m for m in msgs if m.payload["task"] == team.task.id])
            for member in sorted(team.members):
                self._move(self.agents[member], AgentState.UNCOMMITTED)

    def adapt(self) -> int:
        """Run the referral exchange for each uncommitted, valid agent in id order."""
        applied = 0
        perfs = [a.perf for a in self.agents]
        for agent in self.agents:
            if agent.state is not AgentState.UNCOMMITTED or not agent.perf.valid:
                continue
            ex = adaptation_exchange(agent.id, self.graph, perfs, record=bool(self.sinks))
            self._msgs(ex.messages)
            if not ex.triggered:
                continue
            if ex.rewire is None:
                self.report.adaptations_aborted += 1
                if self.sinks:
                    self.emit({"tick": self.tick, "kind": "adapt_aborted", "agent": agent.id,
                               "referrer": ex.referrer})
                continue
            remove, add = ex.rewire
            edges_before = self.graph.edge_count()
            degree_before = self.graph.degree(agent.id)
            try:
                self.graph.rewire(agent.id, remove, add)
            except RewireError as exc:
                self._fail(f"referral produced an illegal rewire: {exc}")
            if self.check and (
                self.graph.edge_count() != edges_before or self.graph.degree(agent.id) != degree_before
            ):
                self._fail(f"rewire of {agent.id} changed edge count or degree")
            applied += 1
            self.report.rewires_performed += 1
            if self.sinks:
                self.emit({"tick": self.tick, "kind": "rewire", "agent": agent.id, "removed": remove, "added": add})
            self._check_drift(agent.id, remove)
        return applied

    def _check_drift(self, a: int, b: int) -> None:
        for task_id in sorted(self.teams):
            members = self.teams[task_id].members
            if a in members and b in members and not is_team_connected(self.graph, members):
                self.report.connectivity_drifts += 1
                if self.sinks:
                    self.emit({"tick": self.tick, "kind": "connectivity_drift", "task": task_id,
                               "members": sorted(members), "edge": [a, b]})

    def sample(self, label: int) -> None:
        """Write metric rows and a network snapshot for ``label``."""
        assert self.out_dir is not None and self._metrics_writer is not None
        metrics = agent_metrics(self.graph)
        perfs = [performance(a.perf) for a in self.agents]
        for i in range(self.graph.n):
            self._metrics_writer.writerow([
                label, i, repr(metrics["degree_centrality"][i]), repr(metrics["betweenness"][i]),
                repr(metrics["closeness"][i]), "" if perfs[i] is None else repr(perfs[i]),
            ])
        export.write_snapshot(self.out_dir, label, self.graph, [a.skill for a in self.agents], perfs)

    # -- invariants ----------------------------------------------------

    def check_invariants(self) -> None:
        try:
            self.graph.check_invariants()
        except AssertionError as exc:
            self._fail(f"graph invariant: {exc}")
        members = [m for team in self.teams.values() for m in team.filled.values()]
        if len(members) != len(set(members)):
            self._fail("an agent sits on two teams")
        active = [a.id for a in self.agents if a.state is AgentState.ACTIVE]
        if sorted(active) != sorted(members):
            self._fail(f"active agents {sorted(active)} != open team members {sorted(members)}")
        for a in self.agents:
            if a.state is AgentState.COMMITTED:
                self._fail(f"agent {a.id} still committed after scheduling")
            if a.state is AgentState.ACTIVE:
                team = self.teams.get(a.task)
                if team is None or a.id not in team.members:
                    self._fail(f"agent {a.id} active on task {a.task} without a seat on its team")
                slot = next(s for s, m in team.filled.items() if m == a.id)
                if team.task.required_skills[slot] != a.skill:
                    self._fail(f"agent {a.id} fills a slot for another skill")

    # -- driver --------------------------------------------------------

    def step(self) -> None:
        cfg = self.config
        self.phase = "announce"
        self.announce()
        self.phase = "propose"
        proposals = self.propose()
        self.phase = "schedule"
        self.schedule(proposals)
        self.phase = "resolve"
        self.resolve()
        self.phase = "adapt"
        if cfg.adaptation_enabled and self.round_ends():
            self.adapt()
        if self.check:
            self.check_invariants()
        self.phase = "sample"
        if self.tick in self._sample_at:
            self.sample(self.tick)

    def run(self) -> SimReport:
        cfg = self.config
        events_fh = None
        try:
            if self.out_dir is not None:
                self.out_dir.mkdir(parents=True, exist_ok=True)
                events_fh = open(self.out_dir / "events.jsonl", "w", encoding="utf-8", newline="\n")
                self.sinks.append(lambda e: events_fh.write(export.dump_json(e) + "\n"))
                self._metrics_fh = open(self.out_dir / "metrics.csv", "w", encoding="utf-8", newline="")
                self._metrics_writer = csv.writer(self._metrics_fh, lineterminator="\n")
                self._metrics_writer.writerow(export.METRIC_COLUMNS)
            if self.sinks:
                self.emit({"tick": 0, "kind": "init", "n_agents": cfg.n_agents,
                           "skills": [a.skill for a in self.agents],
                           "edges": [list(e) for e in self.graph.edges()]})
            for tick in range(cfg.total_ticks):
                self.tick = tick
                self.step()
            self.tick = cfg.total_ticks
            self.phase = "sample"
            if cfg.total_ticks in self._sample_at:
                self.sample(cfg.total_ticks)
            rep = self.report
            rep.tasks_open = len(self.teams)
            rep.success_rate_series = windowed_rates(self.outcomes, cfg.success_window)
            rep.final_performance = [performance(a.perf) for a in self.agents]
            rep.final_edges = [list(e) for e in self.graph.edges()]
            if self.check and rep.tasks_announced != rep.tasks_succeeded + rep.tasks_failed + rep.tasks_open:
                self._fail("task counters do not add up")
            if self.out_dir is not None:
                export.write_json(self.out_dir / "report.json", {"config": cfg.to_dict(), "report": rep.to_dict()})
            return rep
        finally:
            if events_fh is not None:
                events_fh.close()
            if self._metrics_fh is not None:
                self._metrics_fh.close()


def run(config: SimConfig, out_dir: str | Path | None = None, sinks: list[EventSink] | None = None,
        check_invariants: bool = True) -> SimReport:
    """Run one simulation; writes ``events.jsonl``, ``metrics.csv``, snapshots and
    ``report.json`` when ``out_dir`` is given."""
    return Simulation(config, out_dir=out_dir, sinks=sinks, check_invariants=check_invariants).run()

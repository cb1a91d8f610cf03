"""Acceptance gate. Each test prints one PASS/FAIL line, repeated in the terminal summary."""

import json
import random
import time
from collections import Counter
from fractions import Fraction
from itertools import combinations

import pytest

from teamnet.agent_model import (
    AgentState,
    PerformanceTracker,
    performance,
    select_referral,
    select_referrer,
    select_removal,
    should_adapt,
)
from teamnet.cli import EXIT_OK, main
from teamnet.config import SimConfig
from teamnet.sim_engine import Simulation, run
from teamnet.sna_metrics import betweenness, closeness, degree_centrality
from teamnet.social_graph import Graph, TopologySpec

from oracles import (
    EventAuditor,
    betweenness_oracle,
    closeness_oracle,
    direct_argmax,
    direct_argmin,
    direct_trigger,
    random_edges,
)


def base_config(seed, **kw):
    cfg = dict(n_agents=30, n_skills=4, task_size=3, announce_interval=5, task_timeout=20,
               topology=TopologySpec("random_gnm", {"m": 30}), total_ticks=2000, seed=seed,
               metrics_sample_every=0)
    cfg.update(kw)
    return SimConfig(**cfg)


@pytest.fixture(scope="module")
def audited_runs():
    """Ten audited runs shared by the protocol, connectivity and rewiring criteria."""
    out = []
    for seed in range(10):
        auditor = EventAuditor()
        report = run(base_config(seed), sinks=[auditor])
        out.append((seed, report, auditor, auditor.finish()))
    return out


def test_c1_metric_oracles(criterion):
    rng = random.Random(1)
    start = time.perf_counter()
    bad = 0
    for _ in range(100):
        n = rng.randint(1, 7)
        edges = random_edges(rng, n)
        g = Graph(n, edges)
        if betweenness(g) != betweenness_oracle(n, edges):
            bad += 1
        if any(abs(a - b) > 1e-12 for a, b in zip(closeness(g), closeness_oracle(n, edges))):
            bad += 1
    elapsed = time.perf_counter() - start
    criterion("C1 metric oracle equivalence", bad == 0 and elapsed < 5.0,
              f"{bad} mismatches over 100 graphs, {elapsed:.2f}s")


def _tracker(s, a, v=10):
    return PerformanceTracker(attempts=a, successes=s, threshold=v)


def _worked_examples() -> list[str]:
    failures = []

    def check(label, got, want):
        if got != want:
            failures.append(f"{label}: {got!r} != {want!r}")

    check("degree K4", degree_centrality(Graph(4, combinations(range(4), 2))), [1.0] * 4)
    check("degree star", degree_centrality(Graph(4, [(0, 1), (0, 2), (0, 3)])), [1.0, 1 / 3, 1 / 3, 1 / 3])
    check("performance 3/10", performance(_tracker(3, 10)), 0.3)
    t = _tracker(0, 0)
    for _ in range(10):
        t = t.record_outcome(False)
    check("ten rejections", ((t.attempts, t.successes), performance(t)), ((10, 0), 0.0))
    check("adapt 0.2 vs [0.5,0.7]", should_adapt(_tracker(2, 10), [0.5, 0.7]), True)
    check("adapt 0.9 vs [0.1]", should_adapt(_tracker(9, 10), [0.1]), False)
    check("removal", select_removal([(2, 0.3), (3, 0.1), (4, 0.1)]), 3)
    check("referrer", select_referrer([(2, 0.3), (3, 0.9)]), 3)
    check("referral", select_referral([(5, 0.8), (6, 0.9)], requester=1, requester_neighbors={5}), 6)
    return failures


def _random_case_failures(rng) -> list[str]:
    failures = []
    n = rng.randint(2, 9)
    g = Graph(n, random_edges(rng, n))
    if degree_centrality(g) != [sum(g.has_edge(i, j) for j in range(n)) / (n - 1) for i in range(n)]:
        failures.append("degree")

    v = rng.randint(0, 12)
    attempts = rng.randint(0, 20)
    own = _tracker(rng.randint(0, attempts), attempts, v)
    ids = rng.sample(range(40), rng.randint(1, 7))
    nbrs = [(a, Fraction(rng.randint(0, 4), 4)) for a in ids]
    values = [y for _, y in nbrs]
    requester = rng.randint(0, 39)
    req_nbrs = set(rng.sample(range(40), rng.randint(0, 6)))
    ratio = Fraction(own.successes, own.attempts) if own.attempts else None
    if should_adapt(own, values) != direct_trigger(ratio, own.attempts, own.threshold, values):
        failures.append("should_adapt")
    if select_removal(nbrs) != direct_argmin(nbrs):
        failures.append("select_removal")
    if select_referrer(nbrs) != direct_argmax(nbrs):
        failures.append("select_referrer")
    rest = [(a, y) for a, y in nbrs if a != requester and a not in req_nbrs]
    if select_referral(nbrs, requester, req_nbrs) != (direct_argmax(rest) if rest else None):
        failures.append("select_referral")
    return failures


def test_c2_formula_fidelity(criterion):
    start = time.perf_counter()
    failures = _worked_examples()
    rng = random.Random(2)
    for _ in range(500):
        failures += _random_case_failures(rng)
    elapsed = time.perf_counter() - start
    criterion("C2 formula fidelity", not failures and elapsed < 1.0,
              f"{len(failures)} failures {failures[:3]}, {elapsed:.2f}s")


def test_c3_protocol_completeness(criterion, audited_runs):
    bad = {seed: v["protocol"] for seed, _, _, v in audited_runs if v.get("protocol")}
    applications = sum(a.applications for _, _, a, _ in audited_runs)
    closed = sum(len(a.terminal_msgs) for _, _, a, _ in audited_runs)
    criterion("C3 protocol completeness", not bad and applications > 0,
              f"{sum(map(len, bad.values()))} violations, {applications} applications, {closed} teams closed")


def test_c4_connectivity(criterion, audited_runs):
    bad = {seed: v["connectivity"] for seed, _, _, v in audited_runs if v.get("connectivity")}
    accepted = sum(a.acceptances for _, _, a, _ in audited_runs)
    drift = sum(a.drift_events for _, _, a, _ in audited_runs)
    criterion("C4 connectivity at acceptance", not bad and accepted > 0,
              f"{sum(map(len, bad.values()))} violations over {accepted} acceptances, {drift} drift events")


def test_c5_determinism(criterion, tmp_path):
    configs = [
        base_config(11, total_ticks=400).to_dict(),
        base_config(12, total_ticks=300, topology=TopologySpec("ring_lattice", {"k": 4}),
                    metrics_sample_every=50).to_dict(),
        base_config(13, n_agents=20, total_ticks=300, batch_size=2,
                    topology=TopologySpec("preferential_attachment", {"attach": 2})).to_dict(),
    ]
    differing = []
    for i, cfg in enumerate(configs):
        path = tmp_path / f"cfg{i}.json"
        path.write_text(json.dumps(cfg), encoding="utf-8")
        outs = [tmp_path / f"run{i}_{k}" for k in "ab"]
        for out in outs:
            assert main(["run", "--config", str(path), "--out", str(out)]) == EXIT_OK
        for name in ("events.jsonl", "report.json"):
            if (outs[0] / name).read_bytes() != (outs[1] / name).read_bytes():
                differing.append(f"cfg{i}/{name}")
    criterion("C5 determinism", not differing, f"3 configs, differing: {differing or 'none'}")


def test_c6_rewiring_conservation(criterion, audited_runs):
    bad = {seed: v["rewire"] for seed, _, _, v in audited_runs if v.get("rewire")}
    rewires = sum(a.rewires for _, _, a, _ in audited_runs)
    reported = sum(r.rewires_performed for _, r, _, _ in audited_runs)
    criterion("C6 rewiring conservation", not bad and rewires == reported > 0,
              f"{sum(map(len, bad.values()))} violations over {rewires} rewires")


def test_c7_saturation(criterion):
    cfg = SimConfig(n_agents=6, n_skills=2, task_size=2, announce_interval=5, task_timeout=20,
                    topology=TopologySpec("random_gnm", {"m": 15}), total_ticks=1000, seed=7,
                    metrics_sample_every=0)
    qualifying: set[int] = set()
    outcome: dict[int, str] = {}
    sim = Simulation(cfg)

    def watch(e):
        if e["kind"] != "task":
            return
        if e["event"] == "announced":
            free = Counter(a.skill for a in sim.agents if a.state is AgentState.UNCOMMITTED)
            need = Counter(e["skills"])
            if all(free[s] >= c for s, c in need.items()):
                qualifying.add(e["task"])
        else:
            outcome[e["task"]] = e["event"]

    sim.sinks.append(watch)
    report = sim.run()
    failed = [t for t in qualifying if outcome.get(t) != "succeeded"]
    criterion("C7 saturation sanity",
              report.tasks_announced == 200 and not failed and sim.graph.edge_count() == 15,
              f"{report.tasks_announced} announced, {len(qualifying)} qualifying, {len(failed)} not succeeded")


def test_c8_adaptation_directionality(criterion):
    start = time.perf_counter()
    wins, pairs = 0, []
    for seed in range(10):
        cfg = SimConfig(n_agents=50, n_skills=5, task_size=3, announce_interval=5, task_timeout=25,
                        topology=TopologySpec("random_gnm", {"m": 50}), total_ticks=10_000, seed=seed,
                        metrics_sample_every=0)
        on = run(cfg).final_quarter_rate()
        off = run(cfg.with_changes(adaptation_enabled=False)).final_quarter_rate()
        pairs.append(f"{on:.3f}/{off:.3f}")
        wins += on >= off
    elapsed = time.perf_counter() - start
    criterion("C8 adaptation directionality", wins >= 7 and elapsed < 60.0,
              f"{wins}/10 seeds on>=off, {elapsed:.1f}s; on/off {' '.join(pairs)}")

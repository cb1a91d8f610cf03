"""Undirected social network over dense agent ids.

Agents are the integers ``0..n-1``. The graph is simple (no self-loops, no
parallel edges) and symmetric; every mutation keeps it that way.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field
from itertools import combinations
from typing import Any, Iterable

from .errors import ConfigError, RewireError

TOPOLOGY_KINDS = ("random_gnm", "ring_lattice", "preferential_attachment")


class Graph:
    """Adjacency-set graph with agent ids ``0..n-1``."""

    def __init__(self, n: int, edges: Iterable[tuple[int, int]] = ()):
        if n < 0:
            raise ValueError(f"node count must be non-negative, got {n}")
        self.n = n
        self._adj: list[set[int]] = [set() for _ in range(n)]
        self._m = 0
        for i, j in edges:
            self.add_edge(i, j)

    def _check_id(self, i: int) -> None:
        if not (0 <= i < self.n):
            raise IndexError(f"agent id {i} out of range [0, {self.n})")

    def has_edge(self, i: int, j: int) -> bool:
        self._check_id(i)
        self._check_id(j)
        return j in self._adj[i]

    def add_edge(self, i: int, j: int) -> None:
        self._check_id(i)
        self._check_id(j)
        if i == j:
            raise ValueError(f"self-loop on {i} not allowed")
        if j in self._adj[i]:
            raise ValueError(f"edge {i}-{j} already present")
        self._adj[i].add(j)
        self._adj[j].add(i)
        self._m += 1

    def remove_edge(self, i: int, j: int) -> None:
        self._check_id(i)
        self._check_id(j)
        if j not in self._adj[i]:
            raise ValueError(f"edge {i}-{j} not present")
        self._adj[i].discard(j)
        self._adj[j].discard(i)
        self._m -= 1

    def degree(self, i: int) -> int:
        """Number of connections of agent ``i`` (row sum of the adjacency matrix)."""
        self._check_id(i)
        return len(self._adj[i])

    def neighbors(self, i: int) -> list[int]:
        """Neighbours of ``i`` in ascending id order."""
        self._check_id(i)
        return sorted(self._adj[i])

    def edge_count(self) -> int:
        return self._m

    def edges(self) -> list[tuple[int, int]]:
        """All edges as ``(i, j)`` with ``i < j``, sorted."""
        return [(i, j) for i in range(self.n) for j in sorted(self._adj[i]) if i < j]

    def rewire(self, i: int, remove: int, add: int) -> None:
        """Swap edge ``i-remove`` for ``i-add`` in one step.

        Raises :class:`RewireError` and leaves the graph untouched when the
        swap is not legal.
        """
        self._check_id(i)
        self._check_id(remove)
        self._check_id(add)
        if remove == add:
            raise RewireError(f"rewire of {i}: remove and add are both {add}")
        if add == i:
            raise RewireError(f"rewire of {i}: cannot link agent to itself")
        if remove not in self._adj[i]:
            raise RewireError(f"rewire of {i}: no edge to remove {i}-{remove}")
        if add in self._adj[i]:
            raise RewireError(f"rewire of {i}: edge {i}-{add} already present")
        self.remove_edge(i, remove)
        self.add_edge(i, add)

    def copy(self) -> "Graph":
        g = Graph(self.n)
        g._adj = [set(s) for s in self._adj]
        g._m = self._m
        return g

    def check_invariants(self) -> None:
        """Raise ``AssertionError`` if symmetry, loop-freeness or the edge count is off."""
        total = 0
        for i, nbrs in enumerate(self._adj):
            assert i not in nbrs, f"self-loop on {i}"
            for j in nbrs:
                assert i in self._adj[j], f"asymmetric edge {i}-{j}"
            total += len(nbrs)
        assert total == 2 * self._m, f"degree sum {total} != 2 * {self._m}"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self.n == other.n and self._adj == other._adj

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self._m})"


def is_team_connected(g: Graph, members: Iterable[int]) -> bool:
    """True iff the subgraph induced by ``members`` is connected.

    The empty set and singletons count as connected.
    """
    members = set(members)
    for i in members:
        g._check_id(i)
    if len(members) <= 1:
        return True
    start = min(members)
    seen = {start}
    queue = deque([start])
    while queue:
        v = queue.popleft()
        for w in g._adj[v]:
            if w in members and w not in seen:
                seen.add(w)
                queue.append(w)
    return len(seen) == len(members)


@dataclass(frozen=True)
class TopologySpec:
    """Initial-network recipe.

    ``params`` holds ``m`` (edge count) for ``random_gnm``, ``k`` (even
    lattice degree) for ``ring_lattice`` and ``attach`` (edges per new node)
    for ``preferential_attachment``. ``seed=None`` lets the simulation derive
    one from the run seed.
    """

    kind: str = "random_gnm"
    params: dict[str, int] = field(default_factory=dict)
    seed: int | None = None

    @classmethod
    def from_dict(cls, data: Any) -> "TopologySpec":
        if not isinstance(data, dict):
            raise ConfigError("topology", "must be an object with a 'kind' key")
        data = dict(data)
        kind = data.pop("kind", None)
        if kind not in TOPOLOGY_KINDS:
            raise ConfigError("topology.kind", f"must be one of {', '.join(TOPOLOGY_KINDS)}; got {kind!r}")
        seed = data.pop("seed", None)
        if seed is not None and (not isinstance(seed, int) or isinstance(seed, bool)):
            raise ConfigError("topology.seed", "must be an integer")
        wanted = _PARAM_NAME[kind]
        for key, value in data.items():
            if key != wanted:
                raise ConfigError(f"topology.{key}", f"unknown parameter for {kind} (expected {wanted!r})")
            if not isinstance(value, int) or isinstance(value, bool):
                raise ConfigError(f"topology.{key}", "must be an integer")
        if wanted not in data:
            raise ConfigError(f"topology.{wanted}", f"required for {kind}")
        return cls(kind=kind, params=data, seed=seed)

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"kind": self.kind, **self.params}
        if self.seed is not None:
            out["seed"] = self.seed
        return out


_PARAM_NAME = {"random_gnm": "m", "ring_lattice": "k", "preferential_attachment": "attach"}


def validate_topology(n: int, spec: TopologySpec) -> None:
    """Raise :class:`ConfigError` if ``spec`` cannot produce a graph on ``n`` nodes."""
    if n < 1:
        raise ConfigError("n_agents", f"must be >= 1, got {n}")
    if spec.kind not in TOPOLOGY_KINDS:
        raise ConfigError("topology.kind", f"unknown topology {spec.kind!r}")
    name = _PARAM_NAME[spec.kind]
    if name not in spec.params:
        raise ConfigError(f"topology.{name}", f"required for {spec.kind}")
    value = spec.params[name]
    if spec.kind == "random_gnm":
        max_m = n * (n - 1) // 2
        if not 0 <= value <= max_m:
            raise ConfigError("topology.m", f"must be in [0, {max_m}] for n={n}, got {value}")
    elif spec.kind == "ring_lattice":
        if value < 0 or value % 2 or value >= n:
            raise ConfigError("topology.k", f"must be even and in [0, {n - 1}] for n={n}, got {value}")
    else:
        if not 1 <= value < n:
            raise ConfigError("topology.attach", f"must be in [1, {n - 1}] for n={n}, got {value}")


def generate(n: int, spec: TopologySpec, seed: int | None = None) -> Graph:
    """Build the initial network; a pure function of ``(n, spec, seed)``.

    ``seed`` is used only when ``spec.seed`` is ``None``.
    """
    validate_topology(n, spec)
    s = spec.seed if spec.seed is not None else (seed or 0)
    rng = random.Random(f"topology/{spec.kind}/{s}")
    if spec.kind == "random_gnm":
        pairs = list(combinations(range(n), 2))
        return Graph(n, sorted(rng.sample(pairs, spec.params["m"])))
    if spec.kind == "ring_lattice":
        half = spec.params["k"] // 2
        g = Graph(n)
        for i in range(n):
            for d in range(1, half + 1):
                j = (i + d) % n
                if not g.has_edge(i, j):
                    g.add_edge(i, j)
        return g
    return _preferential_attachment(n, spec.params["attach"], rng)


def _preferential_attachment(n: int, attach: int, rng: random.Random) -> Graph:
    # Seed clique of attach+1 nodes, then each new node picks `attach`
    # distinct targets with probability proportional to degree.
    g = Graph(n)
    core = attach + 1
    for i, j in combinations(range(core), 2):
        g.add_edge(i, j)
    pool = [v for v in range(core) for _ in range(attach)]
    for new in range(core, n):
        targets: set[int] = set()
        while len(targets) < attach:
            targets.add(rng.choice(pool))
        for t in sorted(targets):
            g.add_edge(new, t)
            pool.extend((new, t))
    return g

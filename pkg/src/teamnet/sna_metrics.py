"""Whole-network centrality scores: degree, betweenness and closeness."""

from __future__ import annotations

from collections import deque
from fractions import Fraction

from .social_graph import Graph


def degree_centrality(g: Graph) -> list[float]:
    """Degree divided by ``n - 1``; all zeros for a single node."""
    if g.n <= 1:
        return [0.0] * g.n
    scale = g.n - 1
    return [g.degree(i) / scale for i in range(g.n)]


def betweenness(g: Graph) -> list[float]:
    """Unnormalised shortest-path betweenness (Brandes accumulation).

    Each unordered pair ``s, t`` contributes once; disconnected pairs add 0.
    Dependencies are accumulated as exact fractions and rounded once at the end,
    so the result does not depend on summation order.
    """
    n = g.n
    adj = [g.neighbors(v) for v in range(n)]
    score = [Fraction(0)] * n
    for s in range(n):
        order: list[int] = []
        preds: list[list[int]] = [[] for _ in range(n)]
        sigma = [0] * n
        dist = [-1] * n
        sigma[s] = 1
        dist[s] = 0
        queue = deque([s])
        while queue:
            v = queue.popleft()
            order.append(v)
            for w in adj[v]:
                if dist[w] < 0:
                    dist[w] = dist[v] + 1
                    queue.append(w)
                if dist[w] == dist[v] + 1:
                    sigma[w] += sigma[v]
                    preds[w].append(v)
        delta = [Fraction(0)] * n
        for w in reversed(order):
            for v in preds[w]:
                delta[v] += Fraction(sigma[v], sigma[w]) * (1 + delta[w])
            if w != s:
                score[w] += delta[w]
    # every unordered pair was counted from both endpoints
    return [float(x / 2) for x in score]


def bfs_distances(g: Graph, source: int) -> list[int]:
    """Hop distance from ``source`` to every node; -1 when unreachable."""
    dist = [-1] * g.n
    dist[source] = 0
    queue = deque([source])
    while queue:
        v = queue.popleft()
        for w in g.neighbors(v):
            if dist[w] < 0:
                dist[w] = dist[v] + 1
                queue.append(w)
    return dist


def closeness(g: Graph) -> list[float]:
    """Harmonic closeness: sum of ``1/d(i, j)`` over reachable ``j != i``."""
    out = []
    for i in range(g.n):
        dist = bfs_distances(g, i)
        out.append(sum(1.0 / d for d in dist if d > 0))
    return out


def agent_metrics(g: Graph) -> dict[str, list[float]]:
    return {
        "degree_centrality": degree_centrality(g),
        "betweenness": betweenness(g),
        "closeness": closeness(g),
    }

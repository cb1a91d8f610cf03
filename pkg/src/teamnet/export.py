"""File writers: network snapshots (DOT, GraphML), metric rows and JSON documents."""

from __future__ import annotations

import csv
import json
import xml.etree.ElementTree as ET
from pathlib import Path
from typing import Any, Iterable, Sequence

from .social_graph import Graph

METRIC_COLUMNS = ("tick", "agent", "degree_centrality", "betweenness", "closeness", "performance")


def _perf_text(p: float | None) -> str:
    return "" if p is None else repr(p)


def to_dot(g: Graph, skills: Sequence[int], perfs: Sequence[float | None]) -> str:
    lines = ["graph net {"]
    for i in range(g.n):
        lines.append(f'  {i} [skill={skills[i]}, perf="{_perf_text(perfs[i])}"];')
    for i, j in g.edges():
        lines.append(f"  {i} -- {j};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def to_graphml(g: Graph, skills: Sequence[int], perfs: Sequence[float | None]) -> str:
    root = ET.Element("graphml", xmlns="http://graphml.graphdrawing.org/xmlns")
    ET.SubElement(root, "key", {"id": "skill", "for": "node", "attr.name": "skill", "attr.type": "int"})
    ET.SubElement(root, "key", {"id": "perf", "for": "node", "attr.name": "perf", "attr.type": "double"})
    graph = ET.SubElement(root, "graph", id="net", edgedefault="undirected")
    for i in range(g.n):
        node = ET.SubElement(graph, "node", id=f"n{i}")
        ET.SubElement(node, "data", key="skill").text = str(skills[i])
        if perfs[i] is not None:
            ET.SubElement(node, "data", key="perf").text = repr(perfs[i])
    for i, j in g.edges():
        ET.SubElement(graph, "edge", source=f"n{i}", target=f"n{j}")
    ET.indent(root)
    return '<?xml version="1.0" encoding="UTF-8"?>\n' + ET.tostring(root, encoding="unicode") + "\n"


def write_snapshot(out_dir: Path, tick: int, g: Graph, skills: Sequence[int], perfs: Sequence[float | None]) -> None:
    (out_dir / f"net_{tick}.dot").write_text(to_dot(g, skills, perfs), encoding="utf-8", newline="\n")
    (out_dir / f"net_{tick}.graphml").write_text(to_graphml(g, skills, perfs), encoding="utf-8", newline="\n")


def dump_json(obj: Any) -> str:
    """Canonical JSON text used for every artifact (stable across runs)."""
    return json.dumps(obj, separators=(",", ":"), ensure_ascii=True, allow_nan=False)


def write_json(path: Path, obj: Any) -> None:
    path.write_text(json.dumps(obj, indent=2, ensure_ascii=True, allow_nan=False) + "\n", encoding="utf-8", newline="\n")


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def read_dot_edges(text: str) -> list[tuple[int, int]]:
    """Edges of a DOT file written by :func:`to_dot`."""
    edges = []
    for line in text.splitlines():
        line = line.strip().rstrip(";")
        if "--" in line:
            a, b = line.split("--")
            edges.append((int(a), int(b)))
    return edges

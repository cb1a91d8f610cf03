"""Simulation configuration and its JSON form."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any

from .errors import ConfigError
from .social_graph import TopologySpec, validate_topology

_INT_MIN = {
    "n_agents": 1,
    "n_skills": 1,
    "task_size": 1,
    "announce_interval": 1,
    "task_timeout": 1,
    "validity_threshold": 0,
    "batch_size": 1,
    "total_ticks": 1,
    "metrics_sample_every": 0,
    "success_window": 1,
}


@dataclass(frozen=True)
class SimConfig:
    """Run parameters. ``metrics_sample_every=0`` disables sampling."""

    n_agents: int = 30
    n_skills: int = 4
    task_size: int = 3
    announce_interval: int = 5
    task_timeout: int = 20
    validity_threshold: int = 10
    batch_size: int = 1
    topology: TopologySpec = field(default_factory=lambda: TopologySpec("random_gnm", {"m": 30}))
    adaptation_enabled: bool = True
    total_ticks: int = 2000
    seed: int = 0
    metrics_sample_every: int = 100
    success_window: int = 50

    def validate(self) -> "SimConfig":
        for name, low in _INT_MIN.items():
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool):
                raise ConfigError(name, f"must be an integer, got {value!r}")
            if value < low:
                raise ConfigError(name, f"must be >= {low}, got {value}")
        if not isinstance(self.adaptation_enabled, bool):
            raise ConfigError("adaptation_enabled", f"must be true or false, got {self.adaptation_enabled!r}")
        if not isinstance(self.seed, int) or isinstance(self.seed, bool) or not 0 <= self.seed < 2**64:
            raise ConfigError("seed", f"must be an integer in [0, 2^64), got {self.seed!r}")
        if not isinstance(self.topology, TopologySpec):
            raise ConfigError("topology", "must be a topology spec")
        validate_topology(self.n_agents, self.topology)
        return self

    @classmethod
    def from_dict(cls, data: Any) -> "SimConfig":
        if not isinstance(data, dict):
            raise ConfigError("config", "top level must be a JSON object")
        known = {f.name for f in fields(cls)}
        for key in data:
            if key not in known:
                raise ConfigError(key, "unknown configuration key")
        kwargs = dict(data)
        if "topology" in kwargs:
            kwargs["topology"] = TopologySpec.from_dict(kwargs["topology"])
        else:
            n = kwargs.get("n_agents", cls.n_agents)
            m = n * (n - 1) // 2 if isinstance(n, int) and n < 3 else n
            kwargs["topology"] = TopologySpec("random_gnm", {"m": m if isinstance(m, int) and m >= 0 else 0})
        return cls(**kwargs).validate()

    def to_dict(self) -> dict[str, Any]:
        out = asdict(self)
        out["topology"] = self.topology.to_dict()
        return out

    def with_changes(self, **changes: Any) -> "SimConfig":
        data = self.to_dict()
        data.update(changes)
        return SimConfig.from_dict(data)


def load_config(path: str | Path) -> SimConfig:
    """Read and validate a JSON config. ``OSError`` propagates for I/O problems."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"invalid JSON: {exc}") from exc
    return SimConfig.from_dict(data)

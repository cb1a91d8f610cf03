"""Team formation in a multi-agent society steered by its social network."""

from .config import SimConfig, load_config
from .errors import ConfigError, InvariantViolation, ProtocolViolation, RewireError
from .sim_engine import SimReport, Simulation, run
from .social_graph import Graph, TopologySpec, generate, is_team_connected

__all__ = [
    "ConfigError",
    "Graph",
    "InvariantViolation",
    "ProtocolViolation",
    "RewireError",
    "SimConfig",
    "SimReport",
    "Simulation",
    "TopologySpec",
    "generate",
    "is_team_connected",
    "load_config",
    "run",
]

__version__ = "0.1.0"

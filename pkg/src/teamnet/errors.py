"""Exception hierarchy shared by the simulator modules."""

from __future__ import annotations


class TeamnetError(Exception):
    """Base class for all simulator errors."""


class ConfigError(TeamnetError, ValueError):
    """A configuration value is missing, mistyped or infeasible.

    ``key`` names the offending parameter so callers can report it.
    """

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


class RewireError(TeamnetError):
    """A rewire request violated its preconditions; the adaptation is aborted."""


class ProtocolViolation(TeamnetError):
    """A message did not fit the team-formation protocol."""


class InvariantViolation(TeamnetError):
    """A model invariant failed during a run."""

    def __init__(self, message: str, tick: int | None = None, phase: str | None = None):
        where = []
        if tick is not None:
            where.append(f"tick={tick}")
        if phase is not None:
            where.append(f"phase={phase}")
        prefix = f"[{' '.join(where)}] " if where else ""
        super().__init__(prefix + message)
        self.tick = tick
        self.phase = phase

"""Exception taxonomy shared by every module in the package.

All errors raised on purpose derive from BeamoscError so callers can catch
one base class at an API boundary (the CLI does exactly that).
"""

from __future__ import annotations


class BeamoscError(Exception):
    """Base class for every error this package raises deliberately."""


class ValidationError(BeamoscError, ValueError):
    """An input value violates a documented precondition."""


class PullInError(BeamoscError):
    """Electrostatic force exceeds the spring restoring force: the gap collapses."""


class ConvergenceError(BeamoscError):
    """An iterative solver failed to reach its tolerance within its budget."""


class InsufficientDataError(BeamoscError):
    """A trace or envelope is too short for the requested measurement."""


class SimulationError(BeamoscError):
    """The time integrator produced a non-finite state."""

    def __init__(self, message: str, step: int | None = None):
        super().__init__(message)
        self.step = step


class GridCapError(BeamoscError):
    """A sweep grid would exceed the configured point budget."""


class ConfigError(BeamoscError):
    """A config file or override is malformed; the message names the key."""


class StageError(BeamoscError):
    """A design evaluation failed; records which pipeline stage rejected it."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"{stage}: {cause}")
        self.stage = stage
        self.cause = cause

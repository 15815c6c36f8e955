"""
Exception types shared by the simulator, the preparation algorithms and the CLI.

ValidationError marks a violated precondition or malformed input (CLI exit
code 1). SimulationError marks a runtime invariant violation discovered while
evolving a state (CLI exit code 2).
"""


class PrepError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(PrepError, ValueError):
    """A precondition or input constraint was violated."""


class SimulationError(PrepError, RuntimeError):
    """A runtime invariant of the simulation did not hold."""

#!/usr/bin/env python3
"""
Exception hierarchy for the security allocation toolkit.

Every error carries the exit code the command-line surface reports for it.
"""


class SecAllocError(Exception):
    """Base class for all library errors."""

    exit_code = 1


class SchemaError(SecAllocError):
    """Malformed network/config document, or a file that cannot be read."""

    exit_code = 2


class GraphError(SecAllocError):
    """Graph invariant violated (self-edge, duplicate, index, connectivity)."""

    exit_code = 3


class EmptyCollection(SecAllocError):
    """No dominating set exists within the sensor budget."""

    exit_code = 4


class UnboundedImpact(SecAllocError):
    """An unbounded impact was found while bounded results were required."""

    exit_code = 5


class IterationLimit(SecAllocError):
    """The cutting-plane loop ran out of cuts before certifying."""

    exit_code = 6


class InvalidScenario(SecAllocError):
    """Attack/target/monitor combination outside the model assumptions."""

    exit_code = 7


class NumericalError(SecAllocError):
    exit_code = 8


class RootSolveError(NumericalError):
    exit_code = 8


class GenerationError(SecAllocError):
    """Random graph generation could not produce a connected sample."""

    exit_code = 9


class ScopeError(SecAllocError):
    exit_code = 10

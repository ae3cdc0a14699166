"""Shared exception types."""


class PatternLabError(Exception):
    """Base class for patternlab errors."""


class FormatError(PatternLabError):
    """A document (pattern, hypergraph, config file) is malformed or violates invariants."""


class CapExceeded(PatternLabError):
    """An enumeration or materialization would exceed the configured resource cap."""

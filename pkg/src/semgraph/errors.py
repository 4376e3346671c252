"""Exception types shared across the package.

Validation failures are split into distinct classes so callers can tell
a corrupt header apart from a truncated index or an inconsistent one.
"""


class SemgraphError(Exception):
    """Base class for every error raised by this package."""


class EdgeListParseError(SemgraphError):
    """Malformed line in an edge-list input. Carries the 1-based line number."""

    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


class BadMagicError(SemgraphError):
    """Header file does not start with the expected magic bytes."""


class BadVersionError(SemgraphError):
    """Header declares a format version this build does not understand."""


class TruncatedIndexError(SemgraphError):
    """Index file is shorter than the header-declared vertex count requires."""


class IndexConsistencyError(SemgraphError):
    """Offsets, degrees, file sizes, or edge counts disagree with each other."""


class VertexRangeError(SemgraphError):
    """Vertex id outside [0, n)."""


class DomainError(SemgraphError):
    """Operation applied to a graph kind it does not support."""


class NotReadyError(SemgraphError):
    """Reduction value read before the barrier that makes it visible."""


class MemoryContractError(SemgraphError):
    """Per-vertex state grew beyond the bound the program declared."""


class SuperstepCapError(SemgraphError):
    """Run exceeded the configured superstep limit without terminating."""


class SendError(SemgraphError):
    """Message addressed to a vertex id outside [0, n)."""

"""Exception types raised across the package."""


class ConsensusError(Exception):
    """Base class for all package errors."""


class GraphError(ConsensusError, ValueError):
    pass


class NonPositiveWeight(GraphError):
    pass


class SelfLoop(GraphError):
    pass


class DuplicateEdge(GraphError):
    pass


class NodeIdOutOfRange(GraphError, IndexError):
    pass


class EmptyLeaderSet(GraphError):
    pass


class NotConnected(ConsensusError):
    pass


class LengthMismatch(ConsensusError, ValueError):
    pass


class NonFiniteState(ConsensusError, ArithmeticError):
    pass


class NonConvergence(ConsensusError):
    pass


class NotConverged(ConsensusError):
    pass


class CycleDetected(ConsensusError):
    pass


class EnumerationCapExceeded(ConsensusError):
    pass


class GridError(ConsensusError, ValueError):
    pass


class RaggedRows(GridError):
    pass


class UnknownCharacter(GridError):
    pass


class NoDestination(GridError):
    pass


class NoFreeCells(GridError):
    pass


class MalformedHeader(GridError):
    pass


class TruncatedPayload(GridError):
    pass


class PathOffGrid(GridError):
    pass


class FormatError(ConsensusError, ValueError):
    """Unparseable edge-list or state file."""

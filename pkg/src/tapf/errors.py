"""Exception hierarchy shared by all tapf modules."""


class TapfError(Exception):
    """Base class for every error raised by this package."""


class ParseError(TapfError, ValueError):
    """Malformed file content (bad JSON, wrong shape or types)."""


class InstanceError(TapfError, ValueError):
    """Semantically invalid instance, plan or graph."""


class Infeasible(TapfError):
    """No solution exists within the configured horizon cap."""


class SolveTimeout(TapfError):
    """The solver exceeded its wall-clock budget."""


class StateCapExceeded(TapfError):
    """Brute-force search would exceed its state budget."""


class TpgCyclic(TapfError):
    """The temporal plan graph contains a cycle."""


class Inconsistent(TapfError):
    """A simple temporal network has a negative cycle.

    ``witness`` holds the event indices of one negative cycle, when known.
    """

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = list(witness or [])

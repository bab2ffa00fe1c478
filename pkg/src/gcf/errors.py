"""Exception hierarchy shared across the toolkit."""


class GcfError(Exception):
    """Base class for all toolkit errors."""


class InputError(GcfError):
    """Malformed input: bad vertex id, shape mismatch, unreadable file."""


class ValidationError(GcfError):
    """Input is well-formed but fails a pipeline requirement.

    Examples: disconnected graph at a pipeline entry point, neighborhood
    too dense for the local search, size cap exceeded.
    """


class InternalError(GcfError):
    """An internal invariant was violated; indicates a bug, not bad input."""

class NucleusError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(NucleusError, ValueError):
    """Invalid user-supplied parameter."""


class GraphParseError(NucleusError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class TableConfigError(ParameterError):
    """Clique table layout cannot hold the requested cliques."""


class CliqueNotFoundError(NucleusError, KeyError):
    pass


class BucketsExhausted(NucleusError):
    """Raised by ``next_bucket`` once every identifier has been extracted."""


class ContractViolation(NucleusError):
    """An operation was called outside its precondition."""


class InvariantViolation(NucleusError, AssertionError):
    """An internal consistency check failed."""


class OracleCapExceeded(ParameterError):
    """Brute-force oracle refused a graph larger than its cap."""

"""Exception types raised by the planning toolkit.

Every exception carries a stable ``code`` string so that callers (and the CLI)
can map failures without parsing messages.
"""


class FedQCIError(Exception):
    code = "ERROR"

    def __init__(self, message: str = "", subject: str | None = None):
        super().__init__(message)
        self.subject = subject


class UnknownEndpoint(FedQCIError):
    code = "UNKNOWN_ENDPOINT"


class InfeasibleInput(FedQCIError):
    """A use-case endpoint cannot be reached even with every candidate built."""

    code = "INFEASIBLE_INPUT"


class Infeasible(FedQCIError):
    code = "INFEASIBLE"


class Unbounded(FedQCIError):
    code = "UNBOUNDED"


class DimensionMismatch(FedQCIError, ValueError):
    code = "DIMENSION_MISMATCH"


class Overcommitted(FedQCIError):
    code = "OVERCOMMITTED"


class WrongLinkKind(FedQCIError):
    code = "WRONG_LINK_KIND"


class IterationLimit(FedQCIError):
    code = "ITERATION_LIMIT"

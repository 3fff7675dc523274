"""Library exceptions."""
import sys
import traceback


class FomException(Exception):
    """Base exception."""

    def __init__(self, message: str = "") -> None:
        """Initialize."""
        self.message = message
        super().__init__(self.message)

    def to_string(self) -> str:
        """Return the exception as a string."""
        return f"{self.__class__.__name__}: {self.message}\n" + self.traceback()

    def traceback(self) -> str:
        """Return the traceback as a string."""
        etype, value, trace = sys.exc_info()
        return "".join(traceback.format_exception(etype, value, trace, None))

    def get_title(self) -> str:
        """Return a stable title identifying the kind of failure."""
        return "generic_error"


class InvalidParameters(FomException):
    """Construction or bound parameters outside their domain."""

    def get_title(self) -> str:
        """Return a stable title identifying the kind of failure."""
        return "invalid_parameters"


class ScaleOverflow(FomException):
    """Parameters too large for simulation."""

    def get_title(self) -> str:
        """Return a stable title identifying the kind of failure."""
        return "scale_overflow"


class ContractViolation(FomException):
    """An algorithm produced an assignment violating the departure contract."""

    def __init__(self, invariant: str, detail: str = "") -> None:
        """Initialize with the name of the violated invariant."""
        self.invariant = invariant
        self.detail = detail
        super().__init__(f"{invariant}: {detail}" if detail else invariant)

    def get_title(self) -> str:
        """Return a stable title identifying the kind of failure."""
        return "contract_violation"


class PartitionError(FomException):
    """The adversary was asked to label an inconsistent vertex set."""

    def get_title(self) -> str:
        """Return a stable title identifying the kind of failure."""
        return "partition_error"


class UnknownAlgorithm(FomException):
    """Algorithm name not found in the registry."""

    def get_title(self) -> str:
        """Return a stable title identifying the kind of failure."""
        return "unknown_algorithm"


class NonFiniteObjective(FomException):
    """The bound evaluated to a non-finite value at an optimizer iterate."""

    def get_title(self) -> str:
        """Return a stable title identifying the kind of failure."""
        return "non_finite_objective"


class OptimizationFailed(FomException):
    """Every optimizer restart was discarded."""

    def get_title(self) -> str:
        """Return a stable title identifying the kind of failure."""
        return "optimization_failed"


class UsageError(FomException):
    """Bad or missing command line arguments."""

    def get_title(self) -> str:
        """Return a stable title identifying the kind of failure."""
        return "usage_error"

"""Domain error hierarchy.

Every failure raised by the engine, store, or indicator layer derives from
ProcessError and carries a stable machine ``code`` (the class name) that the
HTTP layer maps to a status code.
"""


class ProcessError(Exception):
    """Base class for all domain failures."""

    def __init__(self, message: str = ""):
        super().__init__(message)
        self.message = message

    @property
    def code(self) -> str:
        return type(self).__name__


# -- lifecycle / model definition -------------------------------------------

class MissingInitial(ProcessError):
    pass


class UnreachableState(ProcessError):
    pass


class DanglingTransition(ProcessError):
    pass


class TerminalOutflow(ProcessError):
    pass


class ValidationFailed(ProcessError):
    pass


class FrozenModel(ProcessError):
    pass


class UnknownModel(ProcessError):
    pass


# -- engine ------------------------------------------------------------------

class SingleInstanceViolation(ProcessError):
    pass


class UnknownInstance(ProcessError):
    pass


class UnknownActivity(ProcessError):
    pass


class WrongState(ProcessError):
    pass


class Forbidden(ProcessError):
    pass


class MissingInput(ProcessError):
    pass


class NotRunning(ProcessError):
    pass


class ClockSkew(ProcessError):
    pass


class UnknownObjective(ProcessError):
    pass


class KindMismatch(ProcessError):
    pass


class StabilityForbids(ProcessError):
    pass


class StateNotInTarget(ProcessError):
    pass


# -- trace / store -----------------------------------------------------------

class CorruptLog(ProcessError):
    pass


class StorageFailure(ProcessError):
    pass


class StaleSnapshot(ProcessError):
    pass


class MissingRoot(ProcessError):
    pass


# -- indicators --------------------------------------------------------------

class CyclicRatio(ProcessError):
    pass


class UnknownIndicator(ProcessError):
    pass


def all_error_codes() -> list[str]:
    """Names of every concrete domain error (used to check mapping totality)."""
    seen = []
    stack = list(ProcessError.__subclasses__())
    while stack:
        cls = stack.pop()
        seen.append(cls.__name__)
        stack.extend(cls.__subclasses__())
    return sorted(set(seen))

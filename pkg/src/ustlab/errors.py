"""Exception hierarchy for ustlab."""


class UstlabError(Exception):
    """Base class for all library errors."""


class GraphError(UstlabError, ValueError):
    """Structural problem with a graph or network (self-loop, duplicate edge, ...)."""


class ParseError(GraphError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DisconnectedError(GraphError):
    pass


class ParameterError(UstlabError, ValueError):
    pass


class SizeGuardError(UstlabError, ValueError):
    """Input exceeds the size a dense or exhaustive routine accepts."""


class BudgetExceeded(UstlabError, RuntimeError):
    pass


class InvalidPathError(UstlabError, ValueError):
    pass


class HypothesisViolation(UstlabError, ValueError):
    """A precondition of a gap lower bound does not hold on the given instance."""

    def __init__(self, condition, message):
        self.condition = condition
        super().__init__(f"{condition}: {message}")


class AuditFailure(UstlabError, RuntimeError):
    """A produced decomposition failed its post-hoc audit."""

    def __init__(self, message, result=None):
        self.result = result
        super().__init__(message)


class GenerationError(UstlabError, RuntimeError):
    pass


class TailDivergence(UstlabError, RuntimeError):
    """Killed-walk spectral radius too close to 1 to certify a bubble-sum tail."""

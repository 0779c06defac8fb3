"""Exception hierarchy shared by all modules."""


class VexlabError(Exception):
    """Base class for library errors."""


class ExprSyntaxError(VexlabError):
    """Malformed expression text; ``offset`` is the byte offset of the problem."""

    def __init__(self, message, offset):
        super().__init__(f"{message} (at byte {offset})")
        self.offset = offset


class DomainError(VexlabError, ArithmeticError):
    """Evaluation left the real domain of an operation."""

    def __init__(self, message, subexpr=None, x=None):
        super().__init__(message)
        self.subexpr = subexpr
        self.x = x


class CapabilityError(VexlabError):
    """The requested operation is unavailable for this kind of input."""


class ConvergenceError(VexlabError):
    """An iterative procedure hit its refinement cap."""

    def __init__(self, message, estimates=()):
        super().__init__(message)
        self.estimates = tuple(estimates)


class DivergenceError(VexlabError):
    """A quantity that must be finite is not (e.g. modular infinite for every scale)."""


class ConfigurationError(VexlabError, ValueError):
    """Invalid configuration or parameters."""

    def __init__(self, message, pointer=""):
        super().__init__(message)
        self.pointer = pointer

"""Error signals raised by the library."""


class JZError(Exception):
    """Base class."""


class PoleError(JZError, ZeroDivisionError):
    """Evaluation requested at a pole."""


class DomainError(JZError, ValueError):
    """Parameters outside a convergence strip or off the allowed domain."""


class BranchCutError(DomainError):
    pass


class InputError(JZError, ValueError):
    """Malformed user input (bad fixture, bad selector, bad level)."""


class IncompleteDataError(InputError):
    pass


class InsufficientDepthError(JZError):
    """Oracle tail bound exceeds the requested tolerance."""


class BudgetExhaustedError(JZError):
    pass

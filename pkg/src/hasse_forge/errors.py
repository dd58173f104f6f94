"""Exception hierarchy shared by every module."""


class HasseForgeError(Exception):
    """Base class for all errors raised by hasse_forge."""


class PreconditionError(HasseForgeError, ValueError):
    """An input violated a documented precondition."""


class BudgetExhausted(HasseForgeError):
    """A bounded search ran out of budget before producing its answer."""


class FactorizationError(HasseForgeError):
    """Pollard rho failed to split a composite within its step budget."""


class IndeterminateError(HasseForgeError):
    """A local solvability search hit its depth ceiling without a decision."""

    def __init__(self, message: str, place=None, depth: int | None = None):
        super().__init__(message)
        self.place = place
        self.depth = depth


class RegistryMiss(HasseForgeError, LookupError):
    """The rank-zero registry has no entry for the requested curve."""


class SchemaError(HasseForgeError, ValueError):
    """A certificate document does not match the expected schema."""

"""Exception types shared across the package."""


class PackError(Exception):
    """Base class for all library errors."""


class ParseError(PackError):
    """Malformed instance document; message names the offending line."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class StructureError(PackError):
    """A selection does not have the required shape (arborescence, tree, ...)."""


class ContractError(PackError):
    """An operation was called with inputs violating its precondition."""


class GenerationError(PackError):
    """An instance generator cannot satisfy the requested constraints."""


class BudgetExceededError(PackError):
    """A brute-force oracle refused an input exceeding its budget."""


class InternalError(PackError):
    """An invariant the theory guarantees was violated; carries diagnostics."""

    def __init__(self, message: str, diagnostics: dict | None = None):
        self.diagnostics = diagnostics or {}
        super().__init__(message)

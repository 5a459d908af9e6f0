"""Exception types shared across the package.

The CLI maps these onto exit codes: configuration/usage problems -> 1,
data problems -> 2, numeric failures -> 3.
"""


class DomainError(ValueError):
    """An argument lies outside its documented domain."""


class ContractViolationError(ValueError):
    """Structured data fails one of its documented invariants."""


class ConfigError(ValueError):
    """A config file or override cannot be resolved (unknown key, bad type)."""


class IngestionError(ValueError):
    """A dataset file cannot be parsed.

    Carries the offending path and 1-based line number when known.
    """

    def __init__(self, message: str, path: str | None = None, line: int | None = None):
        self.path = path
        self.line = line
        prefix = ""
        if path is not None:
            prefix = f"{path}:" if line is None else f"{path}:{line}:"
        super().__init__(f"{prefix} {message}" if prefix else message)


class NumericError(ArithmeticError):
    """A computation produced a non-finite or otherwise unusable value."""


class TrainingCollapseError(NumericError):
    """Training aborted on a non-finite or exploding loss."""

    def __init__(self, epoch: int, breakdown=None):
        self.epoch = epoch
        self.breakdown = breakdown
        detail = f" (last loss breakdown: {breakdown})" if breakdown is not None else ""
        super().__init__(f"training collapsed at epoch {epoch}{detail}")

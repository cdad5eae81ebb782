"""Exception hierarchy shared by all modules.

CLI exit codes: InputError family maps to 2, InternalAlarm to 3.  A negative
verdict (rule refuted, check failed) is not an exception; it is a return
value and maps to exit code 1 in the CLI.
"""


class ImlogicError(Exception):
    """Base class for all package errors."""


class InputError(ImlogicError):
    """Malformed input, flavor/signature mismatch, or violated precondition."""


class ParseError(InputError):
    """Syntax error in formula/rule text.  ``position`` is a 1-based column."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at offset {position})")
        self.position = position


class PreconditionError(InputError):
    """An operation was called on inputs that violate its stated precondition."""


class BudgetError(ImlogicError):
    """An exhaustive search would exceed the configured resource budget."""


class InternalAlarm(ImlogicError):
    """Two independent computation routes disagreed.  Never expected."""

"""Exception types shared across the package.

Two failure categories are distinguished so the CLI can map them to
distinct exit codes: problems with user-supplied data (malformed files,
non-numeric cells) and violations of a procedure's mathematical domain
(too few rows, a confidence parameter outside (0, 1), ...).
"""


class SplitArgminError(Exception):
    """Base class for all package errors."""


class InputError(SplitArgminError):
    """Malformed user input, e.g. a ragged or non-numeric CSV file."""


class DomainError(SplitArgminError):
    """A parameter or sample violates a procedure's domain requirements."""

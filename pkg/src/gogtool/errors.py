"""Exception hierarchy shared by the whole toolkit.

Exit-code mapping used by the CLI:
  1 -- validation failures (bad input, inadmissible systems, failed checks)
  2 -- a configurable resource cap was exceeded
  3 -- an internal invariant was violated (always a bug)
"""

from __future__ import annotations


class GogError(Exception):
    """Base class for all toolkit errors."""


class GogSyntaxError(GogError):
    """Syntax error in a .gog document, with 1-based position."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class ValidationError(GogError):
    """Semantically invalid input or violated precondition."""


class DegenerateGraphError(ValidationError):
    """The local tree model would have leaves (a vertex of tree degree < 2)."""


class InadmissibleGateSystem(ValidationError):
    """An operation that needs an admissible gate system got an inadmissible one."""


class CapExceeded(GogError):
    """A resource cap (node budget, link size, search box, ...) was hit."""


class DicksonBoxExhausted(CapExceeded):
    """Minimal-element search ran out of box without stabilising.

    Carries the partial antichain and the partial maximum so callers can
    report lower bounds.
    """

    def __init__(self, message: str, partial_basis, partial_max: int):
        super().__init__(message)
        self.partial_basis = partial_basis
        self.partial_max = partial_max


class InvariantViolation(GogError):
    """A theorem-backed internal invariant failed; this is always a bug."""

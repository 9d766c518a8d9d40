from __future__ import annotations


class VJournalError(Exception):
    """Base class for all package errors."""


class ValidationError(VJournalError, ValueError):
    pass


class NotFoundError(VJournalError, KeyError):
    def __str__(self) -> str:
        return str(self.args[0]) if self.args else "not found"


class LimitError(ValidationError):
    """A profile exceeds the allowed number of queries."""


class QueryParseError(ValidationError):
    """Query text outside the grammar. ``span`` is the offending [start, end) slice."""

    def __init__(self, message: str, text: str, span: tuple[int, int]):
        self.message = message
        self.text = text
        self.span = span
        start, end = span
        super().__init__(f"{message} at {start}:{end} ({text[start:end]!r})")

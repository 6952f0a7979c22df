"""Exception hierarchy for the slotsum toolkit.

The CLI maps these onto exit codes: usage problems exit 1, ``DataError``
exits 2, ``BackendError`` exits 3.
"""

from __future__ import annotations


class SlotsumError(Exception):
    """Base class for all toolkit errors."""


class DuplicateKeyError(SlotsumError):
    """A fact set was constructed with two pairs sharing a normalized key."""


class MarkupInjectionError(SlotsumError):
    """A slot key contains one of the reserved slot delimiter tokens."""


class TemplateParseError(SlotsumError):
    """Template markup is malformed; ``offset`` is the character position."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (offset {offset})")
        self.offset = offset


class DataError(SlotsumError):
    """Corpus content is invalid: dangling ids, bad JSONL, empty corpus."""


class BackendError(SlotsumError):
    """Base class for generation-backend failures."""


class BackendTimeoutError(BackendError):
    """The backend timed out or the host was unreachable after retries."""


class BackendProtocolError(BackendError):
    """The backend answered with a body that violates the wire protocol."""


class BackendStatusError(BackendError):
    """The backend answered with a non-success HTTP status."""

    def __init__(self, message: str, status: int):
        super().__init__(message)
        self.status = status

"""Error types shared by every layer.

Each error carries a stable ``code`` string (the class name) so the CLI and
the HTTP service can surface machine-readable error identifiers without
maintaining a separate mapping table.
"""

from __future__ import annotations

from typing import Any


class VerimonError(Exception):
    """Base class for all domain errors raised by this package."""

    def __init__(self, message: str, **context: Any) -> None:
        super().__init__(message)
        self.message = message
        self.context = context

    @property
    def code(self) -> str:
        return type(self).__name__

    def to_dict(self) -> dict[str, Any]:
        return {"error_code": self.code, "message": self.message, "context": self.context}


# -- parsing and validation of external documents ---------------------------

class ParseError(VerimonError):
    """Malformed input document (bad JSON, wrong encoding)."""


class ValidationError(VerimonError):
    """Structurally well-formed document that violates a template invariant."""


# -- lookups -----------------------------------------------------------------

class UnknownNorm(VerimonError):
    pass


class UnknownLevel(VerimonError):
    pass


class UnknownProcess(VerimonError):
    pass


class UnknownQuestion(VerimonError):
    pass


class UnknownChecklist(VerimonError):
    pass


class UnknownItem(VerimonError):
    pass


class UnknownObservation(VerimonError):
    pass


class UnknownProject(VerimonError):
    pass


class UnknownSelector(VerimonError):
    pass


class UnknownSequence(VerimonError):
    pass


# -- project rule violations -------------------------------------------------

class PermissionDenied(VerimonError):
    pass


class NoVerificationManager(VerimonError):
    pass


class LastManagerRemoval(VerimonError):
    pass


class DocumentKindUnassignable(VerimonError):
    pass


class DuplicateItemId(VerimonError):
    pass


class DuplicateObservationId(VerimonError):
    pass


class MissingJustification(VerimonError):
    pass


class EmptyText(VerimonError):
    pass


class IllegalTransition(VerimonError):
    pass


# -- audit store -------------------------------------------------------------

class StorageFailure(VerimonError):
    pass


class ChainCorruption(VerimonError):
    pass


class InvalidEventSequence(VerimonError):
    pass

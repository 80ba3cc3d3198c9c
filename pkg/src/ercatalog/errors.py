"""Exception hierarchy shared by every layer of the service.

Each class corresponds to one row of the HTTP status mapping; the web
layer translates by type, everything below raises without knowing about
status codes.
"""
from __future__ import annotations


class ServiceError(Exception):
    """Base class for all errors the service can report to a client."""

    def __init__(self, message: str, **detail):
        super().__init__(message)
        self.message = message
        self.detail = detail

    def to_doc(self) -> dict:
        doc = {"error": type(self).__name__, "message": self.message}
        doc.update({k: v for k, v in self.detail.items() if v is not None})
        return doc


class BadSyntax(ServiceError):
    """Malformed URL or filter syntax; carries segment index when known."""

    def __init__(self, message, segment=None, offset=None):
        super().__init__(message, segment=segment, offset=offset)
        self.segment = segment
        self.offset = offset


class DecodeError(BadSyntax):
    """Malformed percent-escape or byte sequence; offset is the byte position."""


class ValidationError(ServiceError):
    """Input rejected before touching storage: bad payload, dangling model
    reference, unresolvable column, ill-typed operand."""

    def __init__(self, message, path=None, row_index=None):
        super().__init__(message, path=path, row_index=row_index)
        self.path = path
        self.row_index = row_index


class AuthenticationRequired(ServiceError):
    pass


class Forbidden(ServiceError):
    pass


class NotFound(ServiceError):
    pass


class MethodNotAllowed(ServiceError):
    def __init__(self, message, allowed=()):
        super().__init__(message)
        self.allowed = tuple(allowed)


class NotAcceptable(ServiceError):
    pass


class Conflict(ServiceError):
    """Model-level conflicts: name collisions, referenced-element deletes,
    last-owner removal."""

    def __init__(self, message, path=None):
        super().__init__(message, path=path)
        self.path = path


class PreconditionFailed(ServiceError):
    pass


class StorageError(ServiceError):
    """Data constraint or transaction failure.

    kind is one of: key_violation, fkey_violation, not_null_violation,
    serialization_conflict, type_error.  row_index, when present, is the
    0-based position of the offending row in the request payload.
    """

    def __init__(self, kind, message, path=None, row_index=None):
        super().__init__(message, kind=kind, path=path, row_index=row_index)
        self.kind = kind
        self.path = path
        self.row_index = row_index


def key_violation(message, path=None, row_index=None):
    return StorageError("key_violation", message, path=path, row_index=row_index)


def fkey_violation(message, path=None, row_index=None):
    return StorageError("fkey_violation", message, path=path, row_index=row_index)


def not_null_violation(message, path=None, row_index=None):
    return StorageError("not_null_violation", message, path=path, row_index=row_index)


def serialization_conflict(message):
    return StorageError("serialization_conflict", message)


def type_error(message, path=None, row_index=None):
    return StorageError("type_error", message, path=path, row_index=row_index)

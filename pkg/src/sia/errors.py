"""Error types shared by every layer of the archive.

Each error carries a stable kebab-case ``code`` so the HTTP service and the
CLI can map failures to statuses / exit codes without string matching on
messages.
"""

from __future__ import annotations


class SiaError(Exception):
    """Base class; ``code`` is the machine-readable failure identifier."""

    code = "error"

    def __init__(self, message: str = ""):
        super().__init__(message or self.code)
        self.message = message or self.code


class ValidationFailed(SiaError):
    code = "validation-failed"

    def __init__(self, violations, message: str = ""):
        self.violations = list(violations)
        detail = "; ".join(f"{v.path}: {v.message}" for v in self.violations)
        super().__init__(message or f"validation failed: {detail}")


class PermissionDenied(SiaError):
    code = "permission-denied"


class NotFound(SiaError):
    code = "not-found"


class UnknownPlace(SiaError):
    code = "unknown-place"


class UnknownPeriod(SiaError):
    code = "unknown-period"


class InvalidInterval(SiaError):
    code = "invalid-interval"


class StorageFailure(SiaError):
    code = "storage-failure"


class StoreLocked(SiaError):
    code = "store-locked"


class RecordParseError(SiaError):
    code = "parse-error"

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = f" at line {line}, column {column}" if line is not None else ""
        super().__init__(f"{message}{where}")


class SchemaVersionUnknown(SiaError):
    code = "schema-version-unknown"


class CorruptRecordFile(SiaError):
    code = "corrupt-record-file"

    def __init__(self, filename: str, message: str = ""):
        self.filename = filename
        super().__init__(message or f"corrupt record file: {filename}")


class InvalidDelta(SiaError):
    code = "invalid-delta"


class StalePlan(SiaError):
    code = "stale-plan"


class DefaultMissing(SiaError):
    code = "default-missing"


class MigrationBlocked(SiaError):
    """A record cannot satisfy the target schema (e.g. a required value
    fails conversion); the batch is aborted and nothing is persisted."""

    code = "migration-blocked"


class InvalidSpec(SiaError):
    code = "invalid-spec"


class InvalidRequest(SiaError):
    code = "invalid-request"


class EmptyComposition(SiaError):
    code = "empty-composition"


class MalformedSourceVector(SiaError):
    code = "malformed-source-vector"

    def __init__(self, record_id: str, message: str = ""):
        self.record_id = record_id
        super().__init__(message or f"vector asset of record {record_id!r} is not well-formed")


class NotAnImage(SiaError):
    code = "not-an-image"


class InvalidOpacity(SiaError):
    code = "invalid-opacity"

"""Exception hierarchy shared across the package."""

from __future__ import annotations


class Text2TableError(Exception):
    """Base class for every error raised by this package."""


# tables
class TableParseError(Text2TableError):
    pass


class NoTablesFound(TableParseError):
    pass


class RowArityMismatch(TableParseError):
    pass


class DuplicateRowHeader(TableParseError):
    pass


class DuplicateTableName(TableParseError):
    pass


class EmptyColumnHeader(TableParseError):
    pass


class SchemaNotFound(Text2TableError):
    pass


class SchemaShapeInvalid(Text2TableError):
    pass


# llm gateway
class GatewayError(Text2TableError):
    pass


class BackendExhausted(GatewayError):
    pass


class ReplayMiss(GatewayError):
    pass


class ScriptedQueueEmpty(GatewayError):
    pass


class AuthMissing(GatewayError):
    pass


class DimensionMismatch(GatewayError):
    pass


class EmptyInput(Text2TableError):
    pass


# pipeline
class MalformedResponse(Text2TableError):
    pass


class EmptyStatements(Text2TableError):
    pass


class NoTuplesFound(Text2TableError):
    pass


class TemplateError(Text2TableError):
    pass


class TooManyStatements(Text2TableError):
    pass


class StageError(Text2TableError):
    """A pipeline stage failed; carries the stage name and the partial transcript."""

    def __init__(self, stage: str, cause: Exception, transcript=()):
        super().__init__(f"stage {stage!r} failed: {type(cause).__name__}: {cause}")
        self.stage = stage
        self.cause = cause
        self.transcript = list(transcript)


# datasets
class SchemaViolation(Text2TableError):
    def __init__(self, sample_id: str, reason: str):
        super().__init__(f"sample {sample_id!r}: {reason}")
        self.sample_id = sample_id
        self.reason = reason


class DuplicateId(Text2TableError):
    pass


class UnknownEvent(Text2TableError):
    pass


# metrics
class EmptySourceSide(Text2TableError):
    pass


class NotLivesumShaped(Text2TableError):
    pass


class QaParseFailure(Text2TableError):
    pass

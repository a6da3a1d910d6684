"""Exception hierarchy shared by every llmfs module."""

from __future__ import annotations


class LlmfsError(Exception):
    """Base class for all errors raised by llmfs."""


class InvalidDataset(LlmfsError, ValueError):
    pass


class EmptyFile(LlmfsError, ValueError):
    pass


class MissingLabelColumn(LlmfsError, KeyError):
    def __init__(self, column: str):
        super().__init__(f"no column named {column!r} in header")
        self.column = column

    def __str__(self) -> str:
        return self.args[0]


class NonNumericCell(LlmfsError, ValueError):
    def __init__(self, row: int, column: str, value: str):
        super().__init__(f"row {row}, column {column!r}: cannot use {value!r} as a finite number")
        self.row = row
        self.column = column
        self.value = value


class NonBinaryLabel(LlmfsError, ValueError):
    def __init__(self, row: int, value: str):
        super().__init__(f"row {row}: label {value!r} is not 0 or 1")
        self.row = row
        self.value = value


class DegenerateSplit(LlmfsError, ValueError):
    pass


class InvalidSpec(LlmfsError, ValueError):
    pass


class SingleClassDataset(LlmfsError, ValueError):
    pass


class IndexOutOfRange(LlmfsError, IndexError):
    pass


class TooFewSamples(LlmfsError, ValueError):
    pass


class KTooLarge(LlmfsError, ValueError):
    pass


class DimensionMismatch(LlmfsError, ValueError):
    pass


class LengthMismatch(LlmfsError, ValueError):
    pass


class EmptyInput(LlmfsError, ValueError):
    pass


class IncompleteGrid(LlmfsError, ValueError):
    pass


class BackendUnreachable(LlmfsError, RuntimeError):
    """The LLM backend could not be reached after all retries."""


class MalformedResponseBody(LlmfsError, RuntimeError):
    """The backend answered, but not with a chat-completion shaped body."""

"""Exception hierarchy shared across the package."""

from __future__ import annotations


class SgvqError(Exception):
    """Base class for every error raised by sgvq."""


class ValidationError(SgvqError, ValueError):
    """Input violates a documented invariant."""


class NotFoundError(SgvqError, LookupError):
    """A referenced node, label or file does not exist."""

    def __str__(self) -> str:
        # LookupError would otherwise repr() the message like KeyError does.
        return str(self.args[0]) if self.args else ""


class GraphParseError(ValidationError):
    """Serialized graph text is malformed; ``field`` names the culprit."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class CaptionsFormatError(ValidationError):
    """Captions file is malformed or breaks an invariant."""

    def __init__(self, message: str, frame_index: int | None = None):
        self.frame_index = frame_index
        if frame_index is not None:
            message = f"frame {frame_index}: {message}"
        super().__init__(message)


class QueryParseError(ValidationError):
    """No subject/relation pattern could be extracted from a question."""


class BudgetExceeded(SgvqError, RuntimeError):
    """Exact MCS search would exceed its node or time budget."""


class ConfigurationError(SgvqError):
    """Missing or inconsistent configuration (endpoint, credential, flags)."""


class CaptionServiceError(SgvqError):
    """Base for failures talking to an external captioning service."""


class CaptionNetworkError(CaptionServiceError):
    pass


class CaptionAuthError(CaptionServiceError):
    pass


class CaptionHTTPError(CaptionServiceError):
    def __init__(self, status: int, message: str = ""):
        self.status = status
        super().__init__(f"captioning service returned HTTP {status}" + (f": {message}" if message else ""))


class CaptionResponseError(CaptionServiceError):
    pass

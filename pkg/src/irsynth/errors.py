"""Exception hierarchy shared by all irsynth modules."""

from __future__ import annotations


class IrsynthError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(IrsynthError, ValueError):
    """Invalid configuration or parameter combination."""


class EmptyInputError(IrsynthError, ValueError):
    """An operation received empty input where content is required."""


class ParseError(IrsynthError, ValueError):
    """A file or reply could not be parsed.

    ``lineno`` is 1-based when the error comes from a line-oriented file.
    """

    def __init__(self, message: str, lineno: int | None = None, path=None):
        self.lineno = lineno
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}"
        if lineno is not None:
            where += f":{lineno}" if where else f"line {lineno}"
        super().__init__(f"{where}: {message}" if where else message)


class ReplyParseError(ParseError):
    """A model reply did not contain the expected structure."""


class IntegrityError(IrsynthError):
    """Cross-record invariant violated (duplicate ids, dangling references)."""

    def __init__(self, message: str, offenders=()):
        self.offenders = list(offenders)
        if self.offenders:
            shown = ", ".join(map(str, self.offenders[:10]))
            more = "" if len(self.offenders) <= 10 else f" (+{len(self.offenders) - 10} more)"
            message = f"{message}: {shown}{more}"
        super().__init__(message)


class ProviderError(IrsynthError):
    """A model service call failed after exhausting retries."""

    def __init__(self, message: str, status: int | None = None, attempts: int | None = None):
        self.status = status
        self.attempts = attempts
        ctx = []
        if status is not None:
            ctx.append(f"status={status}")
        if attempts is not None:
            ctx.append(f"attempts={attempts}")
        super().__init__(f"{message} ({', '.join(ctx)})" if ctx else message)


class InputError(IrsynthError, ValueError):
    """Request rejected locally before any network call (e.g. oversized prompt)."""


class GenerationError(IrsynthError):
    """A candidate-generation step could not produce a usable result."""


class JudgingError(IrsynthError):
    """The relevance judge did not return a usable level."""


class UnsupportedInputError(IrsynthError, ValueError):
    """Input outside the supported domain (e.g. tied ranks for Spearman)."""

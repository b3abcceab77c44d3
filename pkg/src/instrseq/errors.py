"""Exception hierarchy.

Everything derived from :class:`InstrSeqError` is a domain error (bad input,
bad configuration).  Resource guards and property violations live outside that
branch so callers can tell them apart.
"""

from __future__ import annotations


class InstrSeqError(Exception):
    """Base class for domain errors."""


class ParseError(InstrSeqError):
    def __init__(self, message: str, index: int | None = None):
        self.index = index
        if index is not None:
            message = f"instruction {index}: {message}"
        super().__init__(message)


class EmptyProgram(ParseError):
    def __init__(self):
        super().__init__("program contains no instructions")


class DialectError(InstrSeqError):
    pass


class ConfigError(InstrSeqError):
    pass


class RegisterOutOfRange(InstrSeqError):
    def __init__(self, register: int):
        self.register = register
        super().__init__(f"register {register} is out of range")


class MalformedResult(InstrSeqError):
    pass


class UnboundVariable(InstrSeqError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"variable {name!r} is not bound")


class StateSpaceExceeded(Exception):
    """A product construction grew past its configured bound."""

    def __init__(self, limit: int):
        self.limit = limit
        super().__init__(f"state space exceeded limit of {limit}")


class RepliesExhausted(Exception):
    """An execution needed more reply bits than were supplied.

    ``trace`` holds the events produced before running out.
    """

    def __init__(self, trace):
        self.trace = trace
        super().__init__(f"replies exhausted after {len(trace.events)} events")

"""Exception hierarchy shared by the Myerson toolkit modules"""

from typing import Optional


class MyersonError(Exception):
    """Base class for every error raised by the toolkit"""


class InvalidParameterError(MyersonError, ValueError):
    """A generator, sampler or bound received an unusable parameter"""


class SizeLimitError(MyersonError):
    """Requested n is above what an engine can enumerate"""


class _FormatError(MyersonError):
    def __init__(self, message: str, line_number: Optional[int] = None):
        self.line_number = line_number
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)


class GraphFormatError(_FormatError):
    """Malformed graph text"""


class GameFormatError(_FormatError):
    """Malformed game table or spec string"""

"""Custom exception hierarchy for the concept cache benchmark."""

import functools
from typing import Optional, Dict, Any


class ConceptCacheError(Exception):
    """Base exception class for all concept cache related errors."""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}

    def __str__(self) -> str:
        if self.details:
            return f"{self.message} - Details: {self.details}"
        return self.message


class ConfigurationError(ConceptCacheError):
    """Raised when there are configuration-related issues."""
    pass


class InputError(ConceptCacheError):
    """Base class for malformed user input (concepts, KB files, learning problems)."""
    pass


class ConceptSyntaxError(InputError):
    """Raised when a concept expression does not conform to the grammar."""

    def __init__(self, message: str, position: int, text: str = ""):
        super().__init__(f"{message} at position {position}")
        self.position = position
        self.text = text


class KBParseError(InputError):
    """Raised when a knowledge base file cannot be parsed."""

    def __init__(self, message: str, line_number: int):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class DanglingNameError(KBParseError):
    """Raised in strict mode when an assertion uses an undeclared name."""

    def __init__(self, kind: str, name: str, line_number: int):
        super().__init__(f"undeclared {kind} '{name}'", line_number)
        self.kind = kind
        self.name = name


class LearningProblemParseError(InputError):
    """Raised when a learning problem file cannot be parsed."""

    def __init__(self, message: str, line_number: int):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class ReasonerError(ConceptCacheError):
    """Base class for retrieval back end errors."""
    pass


class UnknownNameError(ReasonerError, InputError):
    """Raised when a concept or role name is outside the KB signature."""

    def __init__(self, kind: str, name: str):
        super().__init__(f"Unknown {kind} name '{name}'")
        self.kind = kind
        self.name = name


class CacheError(ConceptCacheError):
    """Base class for cache-related errors."""
    pass


class CacheStateError(CacheError):
    """Raised when a cache operation's precondition does not hold."""
    pass


class UndefinedRatioError(CacheError):
    """Raised when a hit ratio is requested before any lookup happened."""

    def __init__(self):
        super().__init__("Hit ratio is undefined when hits + misses = 0")


class LearningError(ConceptCacheError):
    """Base class for concept learner errors."""
    pass


class InvalidLearningProblemError(LearningError):
    """Raised when a learning problem is inconsistent with itself or the KB."""
    pass


class BenchmarkOutputError(ConceptCacheError):
    """Raised when benchmark results cannot be written."""

    def __init__(self, path: str, message: str):
        super().__init__(f"Cannot write results to {path}: {message}")
        self.path = path


def handle_output_errors(func):
    """Decorator converting OS-level write failures into BenchmarkOutputError.

    The wrapped function must take the output path as its second positional
    argument or as the ``path`` keyword.
    """
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except OSError as e:
            path = kwargs.get('path', args[1] if len(args) > 1 else '<unknown>')
            raise BenchmarkOutputError(str(path), e.strerror or str(e))
    return wrapper

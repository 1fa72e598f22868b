"""Utility modules for the concept cache benchmark."""

from .logging import (
    BenchLogger,
    OperationTracker,
    get_logger,
    setup_application_logging
)

__all__ = [
    'BenchLogger',
    'OperationTracker',
    'get_logger',
    'setup_application_logging'
]

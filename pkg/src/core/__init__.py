"""Core infrastructure components for the concept cache benchmark."""

from .config_manager import (
    ConfigManager,
    EvictionPolicy,
    RetrievalStrategy,
    ReasonerConfig,
    CacheConfig,
    LearnerConfig,
    BenchDefaults,
    AppConfig,
    config
)

__all__ = [
    'ConfigManager',
    'EvictionPolicy',
    'RetrievalStrategy',
    'ReasonerConfig',
    'CacheConfig',
    'LearnerConfig',
    'BenchDefaults',
    'AppConfig',
    'config'
]

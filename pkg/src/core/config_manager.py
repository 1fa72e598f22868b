"""Centralized configuration management for the concept cache benchmark."""

import os
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Dict, Any
from dotenv import load_dotenv

from .exceptions import ConfigurationError

# Load environment variables
load_dotenv()


def _env_bool(name: str, default: str) -> bool:
    return os.getenv(name, default).lower() in ('1', 'true', 'yes', 'on')


class EvictionPolicy(str, Enum):
    """Replacement rule applied when the cache is at capacity."""
    LRU = 'lru'
    MRU = 'mru'
    FIFO = 'fifo'
    LIFO = 'lifo'
    RANDOM = 'random'

    @classmethod
    def from_name(cls, name: str) -> 'EvictionPolicy':
        try:
            return cls(name.strip().lower())
        except ValueError:
            choices = ', '.join(p.value for p in cls)
            raise ConfigurationError(f"Unknown eviction policy '{name}' (choose from {choices})")


class RetrievalStrategy(str, Enum):
    """How concept retrieval reaches the reasoner."""
    NONE = 'none'
    SIMPLE = 'simple'
    SEMANTIC = 'semantic'

    @classmethod
    def from_name(cls, name: str) -> 'RetrievalStrategy':
        try:
            return cls(name.strip().lower())
        except ValueError:
            choices = ', '.join(s.value for s in cls)
            raise ConfigurationError(f"Unknown retrieval strategy '{name}' (choose from {choices})")


@dataclass(frozen=True)
class ReasonerConfig:
    """Synthetic per-call cost of the instrumented reasoner."""
    latency_get_instances_us: float = 1000.0
    latency_check_us: float = 10.0
    real_sleep: bool = False

    def __post_init__(self):
        if self.latency_get_instances_us < 0 or self.latency_check_us < 0:
            raise ConfigurationError(
                "Reasoner latencies must be non-negative",
                {'get_instances_us': self.latency_get_instances_us,
                 'check_us': self.latency_check_us}
            )

    @classmethod
    def from_env(cls) -> 'ReasonerConfig':
        """Create configuration from environment variables."""
        return cls(
            latency_get_instances_us=float(os.getenv('BENCH_LATENCY_GET_US', '1000')),
            latency_check_us=float(os.getenv('BENCH_LATENCY_CHECK_US', '10')),
            real_sleep=_env_bool('BENCH_REAL_SLEEP', 'false')
        )


@dataclass(frozen=True)
class CacheConfig:
    """Capacity and eviction settings of one cache instance."""
    max_size: int = 1024
    policy: EvictionPolicy = EvictionPolicy.LRU
    warm_start: bool = False
    rng_seed: int = 0

    def __post_init__(self):
        if self.max_size < 0:
            raise ConfigurationError(f"Cache max_size must be >= 0, got {self.max_size}")
        if not isinstance(self.policy, EvictionPolicy):
            object.__setattr__(self, 'policy', EvictionPolicy.from_name(str(self.policy)))

    @classmethod
    def from_env(cls) -> 'CacheConfig':
        """Create configuration from environment variables."""
        return cls(
            max_size=int(os.getenv('CACHE_MAX_SIZE', '1024')),
            policy=EvictionPolicy.from_name(os.getenv('CACHE_POLICY', 'lru')),
            warm_start=_env_bool('CACHE_WARM_START', 'false'),
            rng_seed=int(os.getenv('CACHE_RNG_SEED', '0'))
        )


@dataclass(frozen=True)
class LearnerConfig:
    """Search bounds and retrieval wiring of the concept learner."""
    max_iterations: int = 100
    max_length: int = 8
    retrieval_strategy: RetrievalStrategy = RetrievalStrategy.SEMANTIC
    cache_config: CacheConfig = field(default_factory=CacheConfig)
    length_penalty: float = 0.02

    def __post_init__(self):
        if self.max_length < 1:
            raise ConfigurationError(f"Learner max_length must be >= 1, got {self.max_length}")
        if self.max_iterations < 0:
            raise ConfigurationError(f"Learner max_iterations must be >= 0, got {self.max_iterations}")
        if not isinstance(self.retrieval_strategy, RetrievalStrategy):
            object.__setattr__(self, 'retrieval_strategy',
                               RetrievalStrategy.from_name(str(self.retrieval_strategy)))

    @classmethod
    def from_env(cls) -> 'LearnerConfig':
        """Create configuration from environment variables."""
        return cls(
            max_iterations=int(os.getenv('LEARNER_MAX_ITERATIONS', '100')),
            max_length=int(os.getenv('LEARNER_MAX_LENGTH', '8')),
            retrieval_strategy=RetrievalStrategy.from_name(os.getenv('LEARNER_STRATEGY', 'semantic')),
            cache_config=CacheConfig.from_env(),
            length_penalty=float(os.getenv('LEARNER_LENGTH_PENALTY', '0.02'))
        )


@dataclass(frozen=True)
class BenchDefaults:
    """Workload defaults for the benchmark CLI."""
    count: int = 200
    seed: int = 42
    duplication_factor: float = 0.5
    max_length: int = 10

    @classmethod
    def from_env(cls) -> 'BenchDefaults':
        """Create configuration from environment variables."""
        return cls(
            count=int(os.getenv('BENCH_COUNT', '200')),
            seed=int(os.getenv('BENCH_SEED', '42')),
            duplication_factor=float(os.getenv('BENCH_DUP', '0.5')),
            max_length=int(os.getenv('BENCH_MAX_LENGTH', '10'))
        )


@dataclass
class AppConfig:
    """Application-wide configuration settings."""
    log_level: str
    log_file: Optional[str]
    structured_logs: bool

    @classmethod
    def from_env(cls) -> 'AppConfig':
        """Create configuration from environment variables."""
        return cls(
            log_level=os.getenv('LOG_LEVEL', 'WARNING'),
            log_file=os.getenv('LOG_FILE') or None,
            structured_logs=_env_bool('LOG_JSON', 'false')
        )


class ConfigManager:
    """Centralized configuration manager."""

    def __init__(self):
        """Initialize configuration manager."""
        self._reasoner = None
        self._cache = None
        self._learner = None
        self._bench = None
        self._app = None

    @property
    def reasoner(self) -> ReasonerConfig:
        """Get reasoner configuration."""
        if self._reasoner is None:
            self._reasoner = ReasonerConfig.from_env()
        return self._reasoner

    @property
    def cache(self) -> CacheConfig:
        """Get cache configuration."""
        if self._cache is None:
            self._cache = CacheConfig.from_env()
        return self._cache

    @property
    def learner(self) -> LearnerConfig:
        """Get learner configuration."""
        if self._learner is None:
            self._learner = LearnerConfig.from_env()
        return self._learner

    @property
    def bench(self) -> BenchDefaults:
        """Get benchmark workload defaults."""
        if self._bench is None:
            self._bench = BenchDefaults.from_env()
        return self._bench

    @property
    def app(self) -> AppConfig:
        """Get application configuration."""
        if self._app is None:
            self._app = AppConfig.from_env()
        return self._app

    def reload(self) -> None:
        """Reload all configurations from environment."""
        self._reasoner = None
        self._cache = None
        self._learner = None
        self._bench = None
        self._app = None

    def get_config_summary(self) -> Dict[str, Any]:
        """Get a summary of all configurations."""
        return {
            'reasoner': {
                'latency_get_instances_us': self.reasoner.latency_get_instances_us,
                'latency_check_us': self.reasoner.latency_check_us,
                'real_sleep': self.reasoner.real_sleep
            },
            'cache': {
                'max_size': self.cache.max_size,
                'policy': self.cache.policy.value,
                'warm_start': self.cache.warm_start,
                'rng_seed': self.cache.rng_seed
            },
            'learner': {
                'max_iterations': self.learner.max_iterations,
                'max_length': self.learner.max_length,
                'strategy': self.learner.retrieval_strategy.value
            },
            'bench': {
                'count': self.bench.count,
                'seed': self.bench.seed,
                'duplication_factor': self.bench.duplication_factor
            },
            'app': {
                'log_level': self.app.log_level,
                'structured_logs': self.app.structured_logs
            }
        }


# Global configuration instance
config = ConfigManager()

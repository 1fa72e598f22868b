"""Bounded in-memory concept cache with pluggable eviction policies."""

import random
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Callable, Dict, FrozenSet, List, Optional

from core.config_manager import CacheConfig, EvictionPolicy
from core.exceptions import CacheStateError, UndefinedRatioError
from concepts import CanonicalKey, Concept, canonicalize
from utils.logging import get_logger

logger = get_logger(__name__)

# Memory accounting model (bytes)
PER_REFERENCE_BYTES = 8
PER_ENTRY_OVERHEAD_BYTES = 64


@dataclass
class CacheEntry:
    """One cached retrieval result plus its recency bookkeeping."""
    key: CanonicalKey
    instances: FrozenSet[str]
    last_access: int
    inserted_at: int
    access_count: int = 0

    def size_bytes(self) -> int:
        return len(self.key) + len(self.instances) * PER_REFERENCE_BYTES + PER_ENTRY_OVERHEAD_BYTES


@dataclass(frozen=True)
class CacheStats:
    """Counters of a cache instance."""
    hits: int = 0
    misses: int = 0
    evictions: int = 0
    entry_count: int = 0
    memory_estimate: int = 0

    @property
    def lookups(self) -> int:
        return self.hits + self.misses


def hit_ratio(stats: CacheStats) -> float:
    """H / (H + M).

    Raises:
        UndefinedRatioError: when no lookup has been recorded.
    """
    total = stats.hits + stats.misses
    if total == 0:
        raise UndefinedRatioError()
    return stats.hits / total


class VictimSelector(ABC):
    """Strategy interface: pick the key to evict from a non-empty cache."""

    @abstractmethod
    def select_victim(self, entries: Dict[CanonicalKey, CacheEntry]) -> CanonicalKey:
        pass


class LRUSelector(VictimSelector):
    """Least recently used: minimum last access."""

    def select_victim(self, entries):
        return min(entries.values(), key=lambda e: e.last_access).key


class MRUSelector(VictimSelector):
    """Most recently used: maximum last access."""

    def select_victim(self, entries):
        return max(entries.values(), key=lambda e: e.last_access).key


class FIFOSelector(VictimSelector):
    """First in, first out: minimum insertion time."""

    def select_victim(self, entries):
        return min(entries.values(), key=lambda e: e.inserted_at).key


class LIFOSelector(VictimSelector):
    """Last in, first out: maximum insertion time."""

    def select_victim(self, entries):
        return max(entries.values(), key=lambda e: e.inserted_at).key


class RandomSelector(VictimSelector):
    """Uniform seeded random replacement."""

    def __init__(self, seed: int):
        self.rng = random.Random(seed)

    def select_victim(self, entries):
        # dict order is insertion order, so the draw is reproducible per seed
        return self.rng.choice(list(entries))


def make_selector(policy: EvictionPolicy, seed: int = 0) -> VictimSelector:
    """Build the victim selector for an eviction policy."""
    if policy is EvictionPolicy.LRU:
        return LRUSelector()
    if policy is EvictionPolicy.MRU:
        return MRUSelector()
    if policy is EvictionPolicy.FIFO:
        return FIFOSelector()
    if policy is EvictionPolicy.LIFO:
        return LIFOSelector()
    return RandomSelector(seed)


class ConceptCache:
    """Capacity-bounded map from concept keys to instance sets.

    Capacity counts entries. ``max_size = 0`` disables caching: every lookup
    misses and nothing is stored. Recency uses a logical clock that advances
    on every store and every hit. ``key_fn`` decides which concepts share an
    entry (canonical keys for the semantic cache, textual keys for plain
    memoization).
    """

    def __init__(self, config: CacheConfig = None, key_fn: Callable[[Concept], CanonicalKey] = canonicalize):
        self.config = config or CacheConfig()
        self.max_size = self.config.max_size
        self.policy = self.config.policy
        self.key_fn = key_fn
        self._selector = make_selector(self.policy, self.config.rng_seed)
        self._entries: Dict[CanonicalKey, CacheEntry] = {}
        self._clock = 0
        self._hits = 0
        self._misses = 0
        self._evictions = 0
        self._memory = 0

    def __len__(self) -> int:
        return len(self._entries)

    def _tick(self) -> int:
        self._clock += 1
        return self._clock

    def keys(self) -> List[CanonicalKey]:
        return list(self._entries)

    def entry(self, concept: Concept) -> Optional[CacheEntry]:
        """Entry for ``concept`` without touching counters or recency."""
        return self._entries.get(self.key_fn(concept))

    def contains(self, concept: Concept) -> bool:
        """Presence test; not counted as a lookup."""
        return self.key_fn(concept) in self._entries

    def lookup(self, concept: Concept) -> Optional[FrozenSet[str]]:
        """Exact-key lookup. Hits refresh recency; every lookup is counted."""
        entry = self._entries.get(self.key_fn(concept))
        if entry is None:
            self._misses += 1
            return None
        self._hits += 1
        entry.last_access = self._tick()
        entry.access_count += 1
        return entry.instances

    def store(self, concept: Concept, instances: FrozenSet[str]) -> None:
        """Insert or overwrite; evicts per policy when a new key needs a slot."""
        if self.max_size == 0:
            return
        key = self.key_fn(concept)
        instances = frozenset(instances)
        existing = self._entries.get(key)
        if existing is not None:
            self._memory -= existing.size_bytes()
            existing.instances = instances
            existing.last_access = self._tick()
            self._memory += existing.size_bytes()
            return

        if len(self._entries) + 1 > self.max_size:
            self.purge(1)
        now = self._tick()
        entry = CacheEntry(key=key, instances=instances, last_access=now, inserted_at=now)
        self._entries[key] = entry
        self._memory += entry.size_bytes()

    def purge(self, slots_needed: int) -> None:
        """Evict entries until ``slots_needed`` slots are free."""
        if slots_needed <= 0:
            return
        if slots_needed > self.max_size:
            raise CacheStateError(
                f"Cannot free {slots_needed} slots in a cache of capacity {self.max_size}")
        while self._entries and self.max_size - len(self._entries) < slots_needed:
            victim = self._selector.select_victim(self._entries)
            removed = self._entries.pop(victim)
            self._memory -= removed.size_bytes()
            self._evictions += 1
            name = victim.decode('utf-8')
            logger.cache_event('eviction', name, entry=name, policy=self.policy.value, capacity=self.max_size)

    def memory_estimate(self) -> int:
        """Σ (key bytes + |instances| × reference size + entry overhead)."""
        return self._memory

    def clear(self) -> None:
        """Drop every entry and reset counters."""
        self._entries.clear()
        self._clock = 0
        self._hits = 0
        self._misses = 0
        self._evictions = 0
        self._memory = 0

    def get_stats(self) -> CacheStats:
        """Snapshot of the cache counters."""
        return CacheStats(
            hits=self._hits,
            misses=self._misses,
            evictions=self._evictions,
            entry_count=len(self._entries),
            memory_estimate=self._memory,
        )

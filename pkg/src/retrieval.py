"""Retrieval strategies in front of the instrumented reasoner.

Three strategies share one interface:

* ``none``     every query goes to ``reasoner.get_instances``;
* ``simple``   plain memoization keyed by the exact concept text;
* ``semantic`` recursive decomposition over ALC semantics with subsumption
               pruning, backed by canonical keys.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import FrozenSet, List, Optional

from core.config_manager import CacheConfig, ReasonerConfig, RetrievalStrategy
from core.exceptions import CacheStateError
from caching import CacheStats, ConceptCache
from concepts import (
    And, Atomic, Bottom, Concept, Exists, ForAll, Not, Or, TOP, Top,
    canonicalize, render, textual_key
)
from knowledge_base import Interpretation, KnowledgeBase
from reasoner import InstrumentedReasoner, ReasonerStats, check_signature
from utils.logging import get_logger

logger = get_logger(__name__)


def initialize_cache(cache: ConceptCache, kb: KnowledgeBase, reasoner: InstrumentedReasoner) -> int:
    """Warm a cache with ∃r.⊤, A, ¬A and ∃r.A for the whole signature.

    Negated atoms are stored as complements, without a reasoner call. Entries
    are inserted in loop order and evicted per policy as the loop proceeds.
    Returns the number of store operations.

    Raises:
        CacheStateError: if the cache already holds entries.
    """
    if len(cache):
        raise CacheStateError("Cache initialization requires an empty cache")

    domain = reasoner.interp.domain
    stored = 0
    for role in kb.roles:
        query = Exists(role, TOP)
        cache.store(query, reasoner.get_instances(query))
        stored += 1
    for name in kb.atomic_concepts:
        atom = Atomic(name)
        instances = reasoner.get_instances(atom)
        cache.store(atom, instances)
        cache.store(Not(atom), domain - instances)
        stored += 2
        for role in kb.roles:
            query = Exists(role, atom)
            cache.store(query, reasoner.get_instances(query))
            stored += 1

    logger.cache_event('initialized', f"{stored} entries stored, {len(cache)} retained",
                       stored=stored, retained=len(cache), capacity=cache.max_size)
    return stored


def candidate_superconcepts(concept: Concept) -> List[Concept]:
    """Syntactic superconcepts of ``concept``; no reasoning involved.

    D ⊓ E yields D and E; ∃r.C yields ∃r.⊤ (unless C is ⊤ already).
    """
    if isinstance(concept, And):
        return [concept.left, concept.right]
    if isinstance(concept, Exists) and not isinstance(concept.filler, Top):
        return [Exists(concept.role, TOP)]
    return []


class Retriever(ABC):
    """Common interface of the retrieval strategies."""

    strategy: RetrievalStrategy

    def __init__(self, reasoner: InstrumentedReasoner, cache: Optional[ConceptCache] = None):
        self.reasoner = reasoner
        self.cache = cache

    @property
    def interp(self) -> Interpretation:
        return self.reasoner.interp

    @abstractmethod
    def fetch(self, concept: Concept) -> FrozenSet[str]:
        pass

    def initialize(self, kb: KnowledgeBase) -> int:
        """Warm the cache; strategies without a cache store nothing."""
        if self.cache is None:
            return 0
        return initialize_cache(self.cache, kb, self.reasoner)

    def cache_stats(self) -> CacheStats:
        if self.cache is None:
            return CacheStats()
        return self.cache.get_stats()


class DirectRetriever(Retriever):
    """No cache: one full reasoner call per query."""

    strategy = RetrievalStrategy.NONE

    def fetch(self, concept: Concept) -> FrozenSet[str]:
        return self.reasoner.get_instances(concept)


class SimpleRetriever(Retriever):
    """Memoization that ignores the structure of concept expressions."""

    strategy = RetrievalStrategy.SIMPLE

    def __init__(self, reasoner: InstrumentedReasoner, cache_config: CacheConfig = None):
        super().__init__(reasoner, ConceptCache(cache_config, key_fn=textual_key))

    def simple_fetch(self, concept: Concept) -> FrozenSet[str]:
        cached = self.cache.lookup(concept)
        if cached is not None:
            return cached
        result = self.reasoner.get_instances(concept)
        self.cache.store(concept, result)
        return result

    fetch = simple_fetch


class SemanticRetriever(Retriever):
    """Subsumption-aware retrieval over canonical concept keys."""

    strategy = RetrievalStrategy.SEMANTIC

    def __init__(self, reasoner: InstrumentedReasoner, cache_config: CacheConfig = None):
        super().__init__(reasoner, ConceptCache(cache_config, key_fn=canonicalize))
        self.membership_checks = 0

    def fetch(self, concept: Concept) -> FrozenSet[str]:
        return self.fetch_instances(concept)

    def fetch_instances(self, concept: Concept) -> FrozenSet[str]:
        """Instances of ``concept``, equal to the oracle's answer.

        ⊤ and ⊥ are answered directly. Every other concept is first looked up by
        key; atoms then go to the reasoner, composites are decomposed (or
        pruned against cached superconcepts) and the result is stored.
        """
        if isinstance(concept, Top):
            return self.interp.domain
        if isinstance(concept, Bottom):
            return frozenset()

        cached = self.cache.lookup(concept)
        if cached is not None:
            return cached

        if isinstance(concept, Atomic):
            result = self.reasoner.get_instances(concept)
        else:
            result = self._compose(concept)
        self.cache.store(concept, result)
        return result

    def _compose(self, concept: Concept) -> FrozenSet[str]:
        candidates = candidate_superconcepts(concept)
        cached = [d for d in candidates if self.cache.contains(d)]
        # With every conjunct cached, the plain intersection is already exact
        if cached and (isinstance(concept, Exists) or len(cached) < len(candidates)):
            return self.restricted_retrieval(concept, cached)

        if isinstance(concept, Not):
            return self.interp.domain - self.fetch_instances(concept.arg)
        if isinstance(concept, And):
            return self.fetch_instances(concept.left) & self.fetch_instances(concept.right)
        if isinstance(concept, Or):
            return self.fetch_instances(concept.left) | self.fetch_instances(concept.right)
        if isinstance(concept, Exists):
            return self._fetch_existential(concept)
        if isinstance(concept, ForAll):
            return self.fetch_instances(Not(Exists(concept.role, Not(concept.filler))))
        raise TypeError(f"Not a concept: {concept!r}")

    def _fetch_existential(self, concept: Exists) -> FrozenSet[str]:
        fillers = self.interp.ordered(self.fetch_instances(concept.filler))
        result = []
        for a in self.interp.individuals:
            for b in fillers:
                if self.reasoner.check(concept.role, a, b):
                    result.append(a)
                    break
        return frozenset(result)

    def restricted_retrieval(self, concept: Concept, candidates: List[Concept]) -> FrozenSet[str]:
        """Retrieve ``concept`` by instance checks over S = ∩ cached candidate sets.

        With no candidates S is the whole domain.

        Raises:
            CacheStateError: if a candidate is not cached.
        """
        candidate_set = None
        for candidate in candidates:
            instances = self.cache.lookup(candidate)
            if instances is None:
                raise CacheStateError(f"Candidate {render(candidate)} is not cached")
            candidate_set = instances if candidate_set is None else candidate_set & instances
        if candidate_set is None:
            candidate_set = self.interp.domain

        result = []
        for individual in self.interp.ordered(candidate_set):
            self.membership_checks += 1
            if self.reasoner.is_instance(concept, individual):
                result.append(individual)
        return frozenset(result)


@dataclass
class RetrievalContext:
    """A reasoner paired with the retrieval strategy in front of it."""
    reasoner: InstrumentedReasoner
    retriever: Retriever

    @property
    def strategy(self) -> RetrievalStrategy:
        return self.retriever.strategy

    def retrieve(self, concept: Concept) -> FrozenSet[str]:
        """Validate names against the signature, then fetch."""
        check_signature(self.reasoner.interp, concept)
        return self.retriever.fetch(concept)

    def initialize(self, kb: KnowledgeBase) -> int:
        return self.retriever.initialize(kb)

    def cache_stats(self) -> CacheStats:
        return self.retriever.cache_stats()

    def reasoner_stats(self) -> ReasonerStats:
        return self.reasoner.snapshot_stats()


def build_context(
    interp: Interpretation,
    strategy: RetrievalStrategy,
    cache_config: CacheConfig = None,
    reasoner_config: ReasonerConfig = None,
) -> RetrievalContext:
    """Fresh reasoner and (if the strategy has one) a fresh cache."""
    reasoner = InstrumentedReasoner(interp, reasoner_config)
    if not isinstance(strategy, RetrievalStrategy):
        strategy = RetrievalStrategy.from_name(strategy)
    if strategy is RetrievalStrategy.SEMANTIC:
        retriever = SemanticRetriever(reasoner, cache_config)
    elif strategy is RetrievalStrategy.SIMPLE:
        retriever = SimpleRetriever(reasoner, cache_config)
    else:
        retriever = DirectRetriever(reasoner)
    return RetrievalContext(reasoner=reasoner, retriever=retriever)

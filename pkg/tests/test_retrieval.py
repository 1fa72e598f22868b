"""Tests for cache initialization and the three retrieval strategies."""

import pytest
import logging
import os

import sys
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))

from caching import ConceptCache, hit_ratio
from concepts import And, Atomic, BOTTOM, Exists, ForAll, Not, Or, TOP, parse
from core.config_manager import CacheConfig, EvictionPolicy, ReasonerConfig, RetrievalStrategy
from core.exceptions import CacheStateError, ConfigurationError, UnknownNameError
from knowledge_base import load_kb, materialize
from reasoner import InstrumentedReasoner, ReasonerStats, evaluate
from retrieval import (
    DirectRetriever, SemanticRetriever, SimpleRetriever, build_context,
    candidate_superconcepts, initialize_cache
)
from workload import generate_combination_workload

TOY_FAMILY = os.path.join(os.path.dirname(__file__), '..', 'data', 'toy-family.kb')
FAMILY = os.path.join(os.path.dirname(__file__), '..', 'data', 'family.kb')

FEMALE, MALE, PERSON = Atomic('Female'), Atomic('Male'), Atomic('Person')


@pytest.fixture
def kb():
    return load_kb(TOY_FAMILY)


@pytest.fixture
def interp(kb):
    return materialize(kb)


def semantic(interp, max_size=1024, policy=EvictionPolicy.LRU):
    reasoner = InstrumentedReasoner(interp, ReasonerConfig())
    return SemanticRetriever(reasoner, CacheConfig(max_size=max_size, policy=policy))


class TestInitializeCache:

    def test_inserts_full_signature(self, kb, interp):
        reasoner = InstrumentedReasoner(interp)
        cache = ConceptCache(CacheConfig(max_size=1024))
        stored = initialize_cache(cache, kb, reasoner)
        assert stored == 10
        assert len(cache) == 10
        # complements come for free
        assert reasoner.snapshot_stats().get_instances_calls == 7

    def test_complement_entry(self, kb, interp):
        cache = ConceptCache(CacheConfig(max_size=1024))
        initialize_cache(cache, kb, InstrumentedReasoner(interp))
        assert cache.entry(Not(MALE)).instances == {'anna', 'cara'}
        assert cache.entry(Exists('hasChild', FEMALE)).instances == {'anna', 'bob'}

    def test_small_capacity_evicts_during_initialization(self, kb, interp):
        cache = ConceptCache(CacheConfig(max_size=4))
        initialize_cache(cache, kb, InstrumentedReasoner(interp))
        stats = cache.get_stats()
        assert stats.entry_count == 4
        assert stats.evictions == 6

    def test_requires_empty_cache(self, kb, interp):
        cache = ConceptCache(CacheConfig(max_size=1024))
        cache.store(FEMALE, {'anna'})
        with pytest.raises(CacheStateError):
            initialize_cache(cache, kb, InstrumentedReasoner(interp))

    def test_initialization_is_logged(self, kb, interp, caplog):
        caplog.set_level(logging.DEBUG, logger='retrieval')
        cache = ConceptCache(CacheConfig(max_size=4))
        initialize_cache(cache, kb, InstrumentedReasoner(interp))
        events = [r for r in caplog.records if getattr(r, 'operation', None) == 'cache_initialized']
        assert len(events) == 1
        assert events[0].stored == 10
        assert events[0].retained == 4


class TestCandidateSuperconcepts:

    def test_conjunction(self):
        concept = And(FEMALE, Exists('hasChild', MALE))
        assert candidate_superconcepts(concept) == [FEMALE, Exists('hasChild', MALE)]

    def test_existential(self):
        assert candidate_superconcepts(Exists('hasChild', FEMALE)) == [Exists('hasChild', TOP)]

    def test_no_candidates(self):
        assert candidate_superconcepts(FEMALE) == []
        assert candidate_superconcepts(Exists('hasChild', TOP)) == []
        assert candidate_superconcepts(Or(FEMALE, MALE)) == []
        assert candidate_superconcepts(ForAll('hasChild', FEMALE)) == []


class TestSemanticRetriever:

    def test_warm_cache_answers_atoms_without_reasoner(self, kb, interp):
        retriever = semantic(interp)
        retriever.initialize(kb)
        retriever.reasoner.reset_stats()
        assert retriever.fetch_instances(FEMALE) == {'anna', 'cara'}
        stats = retriever.reasoner.snapshot_stats()
        assert stats.get_instances_calls == 0 and stats.check_calls == 0

    def test_universal_via_complement(self, interp):
        retriever = semantic(interp)
        assert retriever.fetch_instances(ForAll('hasChild', FEMALE)) == {'anna', 'bob', 'cara'}
        assert retriever.fetch_instances(ForAll('hasChild', MALE)) == {'cara'}

    def test_bottom_and_top(self, interp):
        retriever = semantic(interp)
        assert retriever.fetch_instances(BOTTOM) == set()
        assert retriever.fetch_instances(TOP) == {'anna', 'bob', 'cara'}
        assert retriever.reasoner.snapshot_stats() == ReasonerStats()
        assert len(retriever.cache) == 0
        assert retriever.cache.get_stats().lookups == 0

    def test_repeated_composite_is_answered_from_cache(self, interp):
        retriever = semantic(interp)
        concept = And(FEMALE, PERSON)
        assert retriever.fetch_instances(concept) == {'anna', 'cara'}
        before = retriever.reasoner.snapshot_stats()
        assert retriever.fetch_instances(concept) == {'anna', 'cara'}
        after = retriever.reasoner.snapshot_stats()
        assert after.get_instances_calls == before.get_instances_calls
        assert after.check_calls == before.check_calls

    def test_commuted_composite_hits(self, interp):
        retriever = semantic(interp)
        retriever.fetch_instances(And(FEMALE, PERSON))
        calls = retriever.reasoner.snapshot_stats().get_instances_calls
        retriever.fetch_instances(And(PERSON, FEMALE))
        assert retriever.reasoner.snapshot_stats().get_instances_calls == calls

    def test_restricted_retrieval_prunes(self, interp):
        retriever = semantic(interp)
        retriever.fetch_instances(FEMALE)
        retriever.reasoner.reset_stats()
        result = retriever.fetch_instances(And(FEMALE, PERSON))
        assert result == {'anna', 'cara'}
        stats = retriever.reasoner.snapshot_stats()
        # two instance checks over Ret(Female), Person never retrieved
        assert stats.get_instances_calls == 0
        assert stats.check_calls == 2
        assert retriever.membership_checks == 2

    def test_restricted_retrieval_without_candidates(self, interp):
        retriever = semantic(interp)
        assert retriever.restricted_retrieval(Exists('hasChild', FEMALE), []) == {'anna', 'bob'}
        assert retriever.membership_checks == 3

    def test_restricted_retrieval_over_empty_superset(self, interp):
        retriever = semantic(interp)
        retriever.cache.store(MALE, frozenset())
        assert retriever.restricted_retrieval(And(MALE, PERSON), [MALE]) == set()
        assert retriever.membership_checks == 0

    def test_restricted_retrieval_requires_cached_candidates(self, interp):
        retriever = semantic(interp)
        with pytest.raises(CacheStateError):
            retriever.restricted_retrieval(And(MALE, PERSON), [MALE])

    def test_existential_prunes_with_role_domain(self, interp):
        retriever = semantic(interp)
        retriever.fetch_instances(Exists('hasChild', TOP))
        retriever.reasoner.reset_stats()
        assert retriever.fetch_instances(Exists('hasChild', MALE)) == set()
        assert retriever.reasoner.snapshot_stats().get_instances_calls == 0

    def test_double_negation_shares_entry(self, interp):
        retriever = semantic(interp)
        retriever.fetch_instances(MALE)
        retriever.reasoner.reset_stats()
        assert retriever.fetch_instances(Not(Not(MALE))) == {'bob'}
        assert retriever.reasoner.snapshot_stats().get_instances_calls == 0

    def test_capacity_one_stays_correct(self, interp):
        retriever = semantic(interp, max_size=1)
        for expression in ("Female and Person", "hasChild some (not Male)", "hasChild only Female",
                           "(Male or Female) and (hasChild some Top)", "not (Female and Person)"):
            concept = parse(expression)
            assert retriever.fetch_instances(concept) == evaluate(interp, concept)
            assert len(retriever.cache) <= 1

    def test_fewer_calls_than_simple_on_conjunctions(self):
        kb = load_kb(FAMILY)
        interp = materialize(kb)
        workload = generate_combination_workload(kb, 60, seed=3, pool_size=4)
        semantic_context = build_context(interp, RetrievalStrategy.SEMANTIC, CacheConfig(max_size=1024))
        simple_context = build_context(interp, RetrievalStrategy.SIMPLE, CacheConfig(max_size=1024))
        for concept in workload:
            assert semantic_context.retrieve(concept) == simple_context.retrieve(concept)
        semantic_calls = semantic_context.reasoner_stats().get_instances_calls
        simple_calls = simple_context.reasoner_stats().get_instances_calls
        assert semantic_calls <= 4
        assert semantic_calls < simple_calls


class TestSimpleRetriever:

    @pytest.fixture
    def retriever(self, interp):
        return SimpleRetriever(InstrumentedReasoner(interp), CacheConfig(max_size=1024))

    def test_memoizes_identical_queries(self, retriever):
        concept = parse("Female and Person")
        assert retriever.simple_fetch(concept) == {'anna', 'cara'}
        assert retriever.simple_fetch(concept) == {'anna', 'cara'}
        assert retriever.reasoner.snapshot_stats().get_instances_calls == 1
        assert hit_ratio(retriever.cache_stats()) == 0.5

    def test_no_structural_awareness(self, retriever):
        retriever.simple_fetch(And(FEMALE, PERSON))
        retriever.simple_fetch(And(PERSON, FEMALE))
        assert retriever.reasoner.snapshot_stats().get_instances_calls == 2

    def test_zero_capacity(self, interp):
        retriever = SimpleRetriever(InstrumentedReasoner(interp), CacheConfig(max_size=0))
        for _ in range(3):
            retriever.fetch(FEMALE)
        assert retriever.reasoner.snapshot_stats().get_instances_calls == 3

    def test_warm_start_serves_atoms(self, kb, retriever):
        retriever.initialize(kb)
        retriever.reasoner.reset_stats()
        retriever.fetch(Not(FEMALE))
        assert retriever.reasoner.snapshot_stats().get_instances_calls == 0


class TestDirectRetriever:

    def test_every_query_hits_the_reasoner(self, kb, interp):
        retriever = DirectRetriever(InstrumentedReasoner(interp))
        assert retriever.initialize(kb) == 0
        for _ in range(4):
            retriever.fetch(FEMALE)
        assert retriever.reasoner.snapshot_stats().get_instances_calls == 4
        stats = retriever.cache_stats()
        assert stats.hits == 0 and stats.misses == 0


class TestRetrievalContext:

    def test_build_context_strategies(self, interp):
        assert isinstance(build_context(interp, RetrievalStrategy.NONE).retriever, DirectRetriever)
        assert isinstance(build_context(interp, 'simple').retriever, SimpleRetriever)
        assert build_context(interp, 'SEMANTIC').strategy is RetrievalStrategy.SEMANTIC

    def test_unknown_strategy(self, interp):
        with pytest.raises(ConfigurationError):
            build_context(interp, 'magic')

    def test_retrieve_checks_signature(self, interp):
        context = build_context(interp, RetrievalStrategy.SEMANTIC)
        with pytest.raises(UnknownNameError):
            context.retrieve(parse("Female and Robot"))
        with pytest.raises(UnknownNameError):
            context.retrieve(parse("likes some Top"))

    def test_warm_workload_of_signature_shapes(self, kb, interp):
        context = build_context(interp, RetrievalStrategy.SEMANTIC, CacheConfig(max_size=10))
        context.initialize(kb)
        context.reasoner.reset_stats()
        queries = [Exists('hasChild', TOP)]
        for name in kb.atomic_concepts:
            queries += [Atomic(name), Not(Atomic(name)), Exists('hasChild', Atomic(name))]
        for concept in queries:
            assert context.retrieve(concept) == evaluate(interp, concept)
        assert context.reasoner_stats().get_instances_calls == 0
        assert hit_ratio(context.cache_stats()) == 1.0

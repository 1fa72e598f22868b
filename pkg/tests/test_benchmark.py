"""Tests for the benchmark harness and CSV output."""

import pytest
import logging
import os
import tempfile

import sys
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))

from benchmark import (
    CSV_HEADER, DEFAULT_FRACTIONS, LEARNING_COLUMNS, MetricsRow, capacity_for, emit_csv, format_csv,
    read_metrics_csv, run_learning_benchmark, run_retrieval_benchmark
)
from concepts import Atomic, textual_key
from core.config_manager import EvictionPolicy, ReasonerConfig, RetrievalStrategy
from core.exceptions import BenchmarkOutputError
from knowledge_base import load_kb
from learner import load_learning_problem
from workload import WorkloadSpec, distinct_count, generate_combination_workload

DATA_DIR = os.path.join(os.path.dirname(__file__), '..', 'data')
TOY_FAMILY = os.path.join(DATA_DIR, 'toy-family.kb')
FAMILY = os.path.join(DATA_DIR, 'family.kb')
LP_DIR = os.path.join(DATA_DIR, 'learning_problems')

HEADER_LINE = ("kb,strategy,policy,capacity_fraction,warm,wall_us,sim_us,hits,misses,hit_ratio,"
               "evictions,get_instances_calls,check_calls,memory_bytes")


def row(**overrides):
    values = dict(
        kb='toy', strategy=RetrievalStrategy.SEMANTIC, policy=EvictionPolicy.LRU,
        capacity_fraction=0.5, warm=False, wall_us=12.5, sim_us=3010.0, hits=7, misses=3,
        hit_ratio=0.7, evictions=1, get_instances_calls=3, check_calls=1, memory_bytes=420,
    )
    values.update(overrides)
    return MetricsRow(**values)


@pytest.fixture
def temp_csv():
    with tempfile.NamedTemporaryFile(suffix='.csv', delete=False) as f:
        path = f.name
    yield path
    if os.path.exists(path):
        os.unlink(path)


class TestCapacity:

    @pytest.mark.parametrize("fraction,distinct,expected", [
        (0.1, 100, 10),
        (0.7, 10, 7),
        (0.3, 10, 3),
        (0.29, 100, 29),
        (0.5, 7, 3),
        (1.0, 37, 37),
        (0.0, 50, 0),
    ])
    def test_capacity_for(self, fraction, distinct, expected):
        assert capacity_for(fraction, distinct) == expected


class TestCSV:

    def test_header_only(self, temp_csv):
        emit_csv([], temp_csv)
        with open(temp_csv, 'rb') as f:
            assert f.read() == (HEADER_LINE + "\n").encode('utf-8')

    def test_header_constant(self):
        assert ','.join(CSV_HEADER) == HEADER_LINE

    def test_ratio_format(self):
        lines = format_csv([row()]).splitlines()
        assert lines[1].split(',')[9] == '0.700000'

    def test_undefined_ratio_is_empty(self):
        fields = format_csv([row(hits=0, misses=0, hit_ratio=None)]).splitlines()[1].split(',')
        assert fields[9] == ''

    def test_lf_line_endings(self, temp_csv):
        emit_csv([row(), row(kb='other')], temp_csv)
        with open(temp_csv, 'rb') as f:
            data = f.read()
        assert b'\r' not in data
        assert data.count(b'\n') == 3

    def test_round_trip(self, temp_csv):
        rows = [row(), row(strategy=RetrievalStrategy.NONE, hits=0, misses=0, hit_ratio=None, warm=True)]
        emit_csv(rows, temp_csv)
        back = read_metrics_csv(temp_csv)
        for original, parsed in zip(rows, back):
            for field in ('kb', 'strategy', 'policy', 'warm', 'hits', 'misses', 'evictions',
                          'get_instances_calls', 'check_calls', 'memory_bytes'):
                assert getattr(parsed, field) == getattr(original, field)
        assert back[1].hit_ratio is None

    def test_learning_columns(self, temp_csv):
        learning_row = row(capacity_fraction=None, capacity=1024, learned_concept='(Female and Person)',
                           f1=1.0, iterations=2)
        emit_csv([learning_row], temp_csv, learning=True)
        with open(temp_csv, encoding='utf-8') as f:
            header = f.readline().strip()
        assert header == HEADER_LINE + ',' + ','.join(LEARNING_COLUMNS)
        parsed = read_metrics_csv(temp_csv)[0]
        assert parsed.capacity == 1024
        assert parsed.learned_concept == '(Female and Person)'
        assert parsed.f1 == 1.0
        assert parsed.capacity_fraction is None

    def test_unwritable_path(self):
        with pytest.raises(BenchmarkOutputError):
            emit_csv([], os.path.join(tempfile.gettempdir(), 'no-such-dir', 'x', 'out.csv'))


class TestRetrievalBenchmark:

    @pytest.fixture
    def toy(self):
        return load_kb(TOY_FAMILY)

    def test_full_factorial(self, toy):
        spec = WorkloadSpec(count=30, seed=1)
        rows = run_retrieval_benchmark(
            toy, spec,
            policies=[EvictionPolicy.LRU, EvictionPolicy.FIFO],
            fractions=[0.5, 1.0],
            strategies=list(RetrievalStrategy),
            warm=[False, True],
        )
        assert len(rows) == 3 * 2 * 2 * 2
        cells = {(r.strategy, r.policy, r.capacity_fraction, r.warm) for r in rows}
        assert len(cells) == len(rows)

    def test_no_cache_baseline(self, toy):
        workload = [Atomic(name) for name in toy.atomic_concepts] * 4
        rows = run_retrieval_benchmark(
            toy, WorkloadSpec(count=len(workload)), policies=[EvictionPolicy.LRU], fractions=[1.0],
            strategies=[RetrievalStrategy.NONE], warm=[False], workload=workload)
        assert rows[0].hits == 0 and rows[0].misses == 0
        assert rows[0].hit_ratio is None
        assert rows[0].get_instances_calls == len(workload)
        assert rows[0].memory_bytes == 0

    def test_duplicates_short_circuit(self, toy):
        spec = WorkloadSpec(count=40, duplication_factor=0.5, seed=3)
        rows = run_retrieval_benchmark(toy, spec, policies=[EvictionPolicy.LRU], fractions=[1.0],
                                       strategies=[RetrievalStrategy.SIMPLE], warm=[False])
        assert rows[0].get_instances_calls < 40

    def test_smaller_cache_evicts_more(self, toy):
        spec = WorkloadSpec(count=40, duplication_factor=0.5, seed=3)
        rows = run_retrieval_benchmark(toy, spec, policies=[EvictionPolicy.LRU], fractions=[0.1, 0.5],
                                       strategies=[RetrievalStrategy.SIMPLE], warm=[False])
        for r in rows:
            assert r.hits + r.misses == 40
        assert rows[0].evictions >= rows[1].evictions
        assert rows[0].hits <= rows[1].hits

    def test_reproducible_except_wall_time(self, toy):
        spec = WorkloadSpec(count=50, seed=4)
        kwargs = dict(policies=[EvictionPolicy.RANDOM, EvictionPolicy.MRU], fractions=[0.3],
                      strategies=[RetrievalStrategy.SEMANTIC], warm=[True])
        first = run_retrieval_benchmark(toy, spec, **kwargs)
        second = run_retrieval_benchmark(toy, spec, **kwargs)
        strip = lambda r: r.__class__(**{**r.__dict__, 'wall_us': 0.0})
        assert [strip(r) for r in first] == [strip(r) for r in second]

    @pytest.mark.parametrize("seed", [1, 7, 42])
    def test_capacity_sweep_is_monotone(self, seed):
        kb = load_kb(FAMILY)
        spec = WorkloadSpec(count=200, duplication_factor=0.5, seed=seed)
        rows = run_retrieval_benchmark(
            kb, spec, policies=[EvictionPolicy.LRU], fractions=DEFAULT_FRACTIONS,
            strategies=[RetrievalStrategy.SEMANTIC], warm=[True])
        assert [r.capacity_fraction for r in rows] == list(DEFAULT_FRACTIONS)
        for smaller, larger in zip(rows, rows[1:]):
            assert larger.sim_us <= smaller.sim_us
            assert larger.get_instances_calls <= smaller.get_instances_calls
            assert larger.hit_ratio >= smaller.hit_ratio

        baseline = run_retrieval_benchmark(
            kb, spec, policies=[EvictionPolicy.LRU], fractions=[1.0],
            strategies=[RetrievalStrategy.NONE], warm=[False])[0]
        assert rows[-1].sim_us <= 0.8 * baseline.sim_us

    def test_cell_memory_is_logged(self, toy, caplog):
        caplog.set_level(logging.DEBUG, logger='benchmark')
        run_retrieval_benchmark(toy, WorkloadSpec(count=20), policies=[EvictionPolicy.LRU],
                                fractions=[1.0], strategies=[RetrievalStrategy.SEMANTIC], warm=[True])
        cells = [r for r in caplog.records if hasattr(r, 'rss_peak')]
        assert len(cells) == 1
        cell = cells[0]
        assert cell.rss_before > 0 and cell.rss_after > 0
        assert cell.rss_peak >= max(cell.rss_before, cell.rss_after)
        assert cell.rss_delta == cell.rss_after - cell.rss_before

    def test_semantic_beats_simple_on_combinations(self):
        kb = load_kb(FAMILY)
        workload = generate_combination_workload(kb, 200, seed=42, pool_size=4)
        rows = run_retrieval_benchmark(
            kb, WorkloadSpec(count=200), policies=[EvictionPolicy.LRU], fractions=[1.0],
            strategies=[RetrievalStrategy.NONE, RetrievalStrategy.SIMPLE, RetrievalStrategy.SEMANTIC],
            warm=[False], workload=workload)
        none, simple, sem = rows
        assert none.get_instances_calls == 200
        assert sem.get_instances_calls <= 0.5 * simple.get_instances_calls
        # plain memoization saves at most the repeated texts
        assert simple.get_instances_calls >= distinct_count(workload, textual_key)


class TestLearningBenchmark:

    def test_rows_per_problem_and_strategy(self):
        kb = load_kb(TOY_FAMILY)
        lp = load_learning_problem(os.path.join(LP_DIR, 'toy-family-female.lp'))
        rows = run_learning_benchmark(kb, [lp], reasoner_config=ReasonerConfig())
        assert [r.strategy for r in rows] == list(RetrievalStrategy)
        assert {r.f1 for r in rows} == {1.0}
        assert {r.learned_concept for r in rows} == {'Female'}
        assert all(r.capacity == 1024 and r.capacity_fraction is None for r in rows)
        calls = {r.strategy: r.get_instances_calls for r in rows}
        assert calls[RetrievalStrategy.SEMANTIC] < calls[RetrievalStrategy.NONE]

    def test_empty_problem_list(self, temp_csv):
        rows = run_learning_benchmark(load_kb(TOY_FAMILY), [])
        assert rows == []
        emit_csv(rows, temp_csv, learning=True)
        with open(temp_csv, encoding='utf-8') as f:
            assert len(f.read().splitlines()) == 1

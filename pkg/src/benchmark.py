"""Benchmark harness: capacity sweeps, policy and strategy comparison, learner runs, CSV output."""

import csv
import io
import itertools
import math
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Union

from core.config_manager import (
    CacheConfig, EvictionPolicy, LearnerConfig, ReasonerConfig, RetrievalStrategy, config
)
from core.exceptions import handle_output_errors
from caching import CacheStats, hit_ratio
from concepts import Concept
from knowledge_base import Interpretation, KnowledgeBase, materialize
from learner import LearningProblem, learn
from monitoring import MemorySampler
from reasoner import ReasonerStats
from retrieval import build_context
from workload import WorkloadSpec, distinct_count, generate_workload
from utils.logging import OperationTracker, get_logger

logger = get_logger(__name__)

CSV_HEADER = (
    'kb', 'strategy', 'policy', 'capacity_fraction', 'warm', 'wall_us', 'sim_us',
    'hits', 'misses', 'hit_ratio', 'evictions', 'get_instances_calls', 'check_calls',
    'memory_bytes',
)
LEARNING_COLUMNS = ('capacity', 'learned_concept', 'f1', 'iterations')

DEFAULT_FRACTIONS = tuple(round(0.1 * i, 1) for i in range(1, 11))
DEFAULT_LEARNING_CAPACITY = 1024


@dataclass(frozen=True)
class MetricsRow:
    """One benchmark cell."""
    kb: str
    strategy: RetrievalStrategy
    policy: EvictionPolicy
    capacity_fraction: Optional[float]
    warm: bool
    wall_us: float
    sim_us: float
    hits: int
    misses: int
    hit_ratio: Optional[float]
    evictions: int
    get_instances_calls: int
    check_calls: int
    memory_bytes: int
    # learning runs only
    capacity: Optional[int] = None
    learned_concept: Optional[str] = None
    f1: Optional[float] = None
    iterations: Optional[int] = None


def capacity_for(fraction: float, distinct: int) -> int:
    """Cache max size for a capacity fraction: floor(fraction × distinct)."""
    # tolerance for products like 0.7 * 10 = 7.000000000000001 and 0.29 * 100
    return max(0, math.floor(fraction * distinct + 1e-9))


def _ratio_or_none(stats: CacheStats) -> Optional[float]:
    if stats.lookups == 0:
        return None
    return hit_ratio(stats)


def _row(kb: KnowledgeBase, strategy: RetrievalStrategy, policy: EvictionPolicy,
         fraction: Optional[float], warm: bool, wall_us: float,
         stats: ReasonerStats, cache_stats: CacheStats, **learning) -> MetricsRow:
    return MetricsRow(
        kb=kb.name,
        strategy=strategy,
        policy=policy,
        capacity_fraction=fraction,
        warm=warm,
        wall_us=wall_us,
        sim_us=stats.simulated_latency_us,
        hits=cache_stats.hits,
        misses=cache_stats.misses,
        hit_ratio=_ratio_or_none(cache_stats),
        evictions=cache_stats.evictions,
        get_instances_calls=stats.get_instances_calls,
        check_calls=stats.check_calls,
        memory_bytes=cache_stats.memory_estimate,
        **learning,
    )


def run_workload(
    kb: KnowledgeBase,
    interp: Interpretation,
    workload: Sequence[Concept],
    strategy: RetrievalStrategy,
    cache_config: CacheConfig,
    reasoner_config: ReasonerConfig = None,
    fraction: Optional[float] = None,
) -> MetricsRow:
    """Replay ``workload`` through a fresh reasoner and cache; one MetricsRow."""
    context = build_context(interp, strategy, cache_config, reasoner_config)
    with MemorySampler(label='retrieval_cell') as sampler:
        started = time.perf_counter()
        if cache_config.warm_start:
            context.initialize(kb)
            sampler.sample()
        for concept in workload:
            context.retrieve(concept)
        wall_us = (time.perf_counter() - started) * 1_000_000

    row = _row(kb, context.strategy, cache_config.policy, fraction, cache_config.warm_start,
               wall_us, context.reasoner_stats(), context.cache_stats())
    logger.debug(
        f"{row.get_instances_calls} getInstances, {row.check_calls} checks, "
        f"{row.memory_bytes} estimated bytes, RSS delta {sampler.delta}, peak {sampler.peak}",
        extra={'kb': kb.name, 'strategy': row.strategy.value, 'policy': row.policy.value,
               'capacity': cache_config.max_size, 'warm': cache_config.warm_start,
               **sampler.summary()})
    return row


def run_retrieval_benchmark(
    kb: KnowledgeBase,
    spec: WorkloadSpec,
    policies: Iterable[EvictionPolicy] = tuple(EvictionPolicy),
    fractions: Iterable[float] = DEFAULT_FRACTIONS,
    strategies: Iterable[RetrievalStrategy] = tuple(RetrievalStrategy),
    warm: Iterable[bool] = (False, True),
    reasoner_config: ReasonerConfig = None,
    workload: Optional[Sequence[Concept]] = None,
) -> List[MetricsRow]:
    """Full factorial over strategies × policies × fractions × warm/cold.

    Every cell replays the same workload (generated from ``spec`` unless
    given) against its own reasoner and cache. The cache size of a cell is
    floor(fraction × number of distinct queries).
    """
    if workload is None:
        workload = generate_workload(kb, spec)
    interp = materialize(kb)
    distinct = distinct_count(workload)
    rows = []

    with OperationTracker(logger, 'retrieval_benchmark', kb=kb.name):
        for strategy, policy, fraction, warm_start in itertools.product(
                list(strategies), list(policies), list(fractions), list(warm)):
            cache_config = CacheConfig(
                max_size=capacity_for(fraction, distinct),
                policy=policy,
                warm_start=warm_start,
                rng_seed=spec.seed,
            )
            rows.append(run_workload(kb, interp, workload, strategy, cache_config,
                                     reasoner_config, fraction=fraction))

    logger.performance_metric('retrieval_cells', len(rows), unit='', kb=kb.name)
    return rows


def run_learning_benchmark(
    kb: KnowledgeBase,
    lps: Iterable[LearningProblem],
    strategies: Iterable[RetrievalStrategy] = tuple(RetrievalStrategy),
    capacity: int = DEFAULT_LEARNING_CAPACITY,
    policy: EvictionPolicy = EvictionPolicy.LRU,
    learner_config: LearnerConfig = None,
    reasoner_config: ReasonerConfig = None,
) -> List[MetricsRow]:
    """One learner run per learning problem × strategy."""
    base = learner_config or config.learner
    cache_config = CacheConfig(
        max_size=capacity,
        policy=policy,
        warm_start=base.cache_config.warm_start,
        rng_seed=base.cache_config.rng_seed,
    )
    interp = materialize(kb)
    rows = []

    for lp in lps:
        for strategy in strategies:
            cfg = LearnerConfig(
                max_iterations=base.max_iterations,
                max_length=base.max_length,
                retrieval_strategy=strategy,
                cache_config=cache_config,
                length_penalty=base.length_penalty,
            )
            started = time.perf_counter()
            result = learn(kb, lp, cfg, reasoner_config, interp=interp)
            wall_us = (time.perf_counter() - started) * 1_000_000
            rows.append(_row(
                kb, cfg.retrieval_strategy, policy, None, cache_config.warm_start, wall_us,
                result.stats, result.cache_stats,
                capacity=capacity,
                learned_concept=result.best.rendered,
                f1=result.best.quality,
                iterations=result.iterations,
            ))
    return rows


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------

def _optional(value, fmt: str) -> str:
    return '' if value is None else format(value, fmt)


def _format_row(row: MetricsRow, learning: bool) -> List[str]:
    fields = [
        row.kb,
        row.strategy.value,
        row.policy.value,
        _optional(row.capacity_fraction, '.2f'),
        'true' if row.warm else 'false',
        f"{row.wall_us:.1f}",
        f"{row.sim_us:.1f}",
        str(row.hits),
        str(row.misses),
        _optional(row.hit_ratio, '.6f'),
        str(row.evictions),
        str(row.get_instances_calls),
        str(row.check_calls),
        str(row.memory_bytes),
    ]
    if learning:
        fields += [
            _optional(row.capacity, 'd'),
            row.learned_concept or '',
            _optional(row.f1, '.6f'),
            _optional(row.iterations, 'd'),
        ]
    return fields


def format_csv(rows: Iterable[MetricsRow], learning: bool = False) -> str:
    """Render rows as CSV text (LF line endings)."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(CSV_HEADER + (LEARNING_COLUMNS if learning else ()))
    for row in rows:
        writer.writerow(_format_row(row, learning))
    return buffer.getvalue()


@handle_output_errors
def emit_csv(rows: Iterable[MetricsRow], path: Union[str, Path], learning: bool = False) -> None:
    """Write rows to ``path`` as UTF-8 CSV; the header is always written."""
    path = Path(path)
    with open(path, 'w', encoding='utf-8', newline='') as f:
        f.write(format_csv(rows, learning))
    logger.info(f"Wrote results to {path}")


def _parse_optional(text: str, parse):
    return None if text == '' else parse(text)


def read_metrics_csv(path: Union[str, Path]) -> List[MetricsRow]:
    """Read a file written by ``emit_csv`` back into MetricsRow objects."""
    with open(path, encoding='utf-8', newline='') as f:
        reader = csv.DictReader(f)
        rows = []
        for record in reader:
            rows.append(MetricsRow(
                kb=record['kb'],
                strategy=RetrievalStrategy.from_name(record['strategy']),
                policy=EvictionPolicy.from_name(record['policy']),
                capacity_fraction=_parse_optional(record['capacity_fraction'], float),
                warm=record['warm'] == 'true',
                wall_us=float(record['wall_us']),
                sim_us=float(record['sim_us']),
                hits=int(record['hits']),
                misses=int(record['misses']),
                hit_ratio=_parse_optional(record['hit_ratio'], float),
                evictions=int(record['evictions']),
                get_instances_calls=int(record['get_instances_calls']),
                check_calls=int(record['check_calls']),
                memory_bytes=int(record['memory_bytes']),
                capacity=_parse_optional(record.get('capacity') or '', int),
                learned_concept=record.get('learned_concept') or None,
                f1=_parse_optional(record.get('f1') or '', float),
                iterations=_parse_optional(record.get('iterations') or '', int),
            ))
        return rows

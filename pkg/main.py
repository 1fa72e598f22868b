#!/usr/bin/env python3
"""
Concept Cache Bench - command-line interface.
Semantic caching for ALC instance retrieval: benchmarks, learner runs and one-shot queries.
"""

import os
import sys
from typing import Callable, List, TypeVar

import click

# Add src to path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), 'src'))

from benchmark import emit_csv, format_csv, run_learning_benchmark, run_retrieval_benchmark
from concepts import parse
from core.config_manager import (
    CacheConfig, EvictionPolicy, LearnerConfig, ReasonerConfig, RetrievalStrategy, config
)
from core.exceptions import ConceptCacheError, ConfigurationError, InputError
from knowledge_base import load_kb, materialize
from learner import load_learning_problem
from retrieval import build_context
from utils.logging import get_logger, setup_application_logging
from workload import WorkloadSpec, generate_combination_workload, generate_workload

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INPUT = 2

T = TypeVar('T')


class BenchGroup(click.Group):
    """Root group mapping failures onto the documented exit codes."""

    def main(self, *args, **kwargs):
        kwargs['standalone_mode'] = False
        try:
            rv = super().main(*args, **kwargs)
        except InputError as e:
            click.echo(f"Error: {e}", err=True)
            sys.exit(EXIT_INPUT)
        except (ConceptCacheError, OSError) as e:
            click.echo(f"Error: {e}", err=True)
            sys.exit(EXIT_USAGE)
        except click.UsageError as e:
            e.show()
            sys.exit(EXIT_USAGE)
        except click.ClickException as e:
            e.show()
            sys.exit(e.exit_code)
        except click.Abort:
            click.echo("Aborted!", err=True)
            sys.exit(EXIT_USAGE)
        sys.exit(rv if isinstance(rv, int) else EXIT_OK)


def _split(value: str, parser: Callable[[str], T], param: str) -> List[T]:
    items = [item.strip() for item in value.split(',') if item.strip()]
    if not items:
        raise click.BadParameter("expected a comma-separated list", param_hint=param)
    try:
        return [parser(item) for item in items]
    except ConfigurationError as e:
        raise click.BadParameter(e.message, param_hint=param)


def parse_fractions(value: str) -> List[float]:
    """``0.1..1.0`` (step 0.1, or ``0.2..1.0:0.2``) or a comma list like ``0.1,0.5,1``."""
    try:
        if '..' in value:
            bounds, _, step_text = value.partition(':')
            low_text, high_text = bounds.split('..', 1)
            low, high = float(low_text), float(high_text)
            step = float(step_text) if step_text else 0.1
            if step <= 0 or high < low:
                raise ValueError(value)
            steps = int(round((high - low) / step))
            fractions = [round(low + i * step, 10) for i in range(steps + 1)]
        else:
            fractions = [float(item) for item in value.split(',') if item.strip()]
    except ValueError:
        raise click.BadParameter(f"cannot read fractions from '{value}'", param_hint='--fractions')
    if not fractions or any(f < 0 or f > 1 for f in fractions):
        raise click.BadParameter("fractions must lie in [0, 1]", param_hint='--fractions')
    return fractions


def latency_options(func):
    """Shared reasoner cost flags."""
    func = click.option('--real-sleep', is_flag=True,
                        help='Actually sleep for the simulated latency')(func)
    func = click.option('--latency-check-us', type=float,
                        default=lambda: config.reasoner.latency_check_us,
                        help='Simulated cost of one instance/role check (µs)')(func)
    func = click.option('--latency-get-us', type=float,
                        default=lambda: config.reasoner.latency_get_instances_us,
                        help='Simulated cost of one getInstances call (µs)')(func)
    return func


def _reasoner_config(latency_get_us: float, latency_check_us: float, real_sleep: bool) -> ReasonerConfig:
    try:
        return ReasonerConfig(latency_get_us, latency_check_us, real_sleep or config.reasoner.real_sleep)
    except ConfigurationError as e:
        raise click.BadParameter(e.message, param_hint='--latency-get-us/--latency-check-us')


def _write(rows, out, learning: bool = False) -> None:
    if out:
        emit_csv(rows, out, learning=learning)
        click.echo(f"Wrote {len(rows)} rows to {out}", err=True)
    else:
        click.echo(format_csv(rows, learning), nl=False)


@click.group(cls=BenchGroup)
@click.version_option(version='1.0.0')
@click.option('--verbose', '-v', is_flag=True, help='Verbose output')
@click.option('--log-level', default=None, help='Log level (DEBUG, INFO, WARNING, ERROR)')
@click.option('--log-json', is_flag=True, help='Structured JSON logs on stderr')
@click.pass_context
def cli(ctx, verbose, log_level, log_json):
    """
    Concept Cache Bench - semantic caching for ALC concept retrieval

    Common workflows:
      • Capacity sweep: bench retrieve --kb data/family.kb --out sweep.csv
      • Learner runs:   bench learn --kb data/family.kb --lp data/learning_problems/family-father.lp
      • One query:      retrieve eval --kb data/toy-family.kb --concept "hasChild some Female"
    """
    ctx.ensure_object(dict)
    app = config.app
    level = log_level or ('INFO' if verbose else app.log_level)
    setup_application_logging(level=level, log_file=app.log_file,
                              structured_format=log_json or app.structured_logs)
    ctx.obj['verbose'] = verbose


# ============================================================================
# BENCHMARKS
# ============================================================================

@cli.group()
def bench():
    """Run benchmark grids and write CSV results."""
    pass


@bench.command('retrieve')
@click.option('--kb', 'kb_path', required=True, type=click.Path(exists=True, dir_okay=False),
              help='Knowledge base file')
@click.option('--count', type=int, default=lambda: config.bench.count, help='Number of queries')
@click.option('--max-length', type=int, default=lambda: config.bench.max_length,
              help='Maximum concept length')
@click.option('--seed', type=int, default=lambda: config.bench.seed, help='Workload seed')
@click.option('--dup', type=float, default=lambda: config.bench.duplication_factor,
              help='Duplicate share of the workload, in [0, 1)')
@click.option('--strategies', default='none,simple,semantic', help='Comma-separated strategies')
@click.option('--policies', default='lru,mru,fifo,lifo,random', help='Comma-separated policies')
@click.option('--fractions', default='0.1..1.0', help='Capacity fractions: range or comma list')
@click.option('--warm', type=click.Choice(['both', 'on', 'off']), default='both',
              help='Warm start (cache initialization) setting')
@click.option('--workload', 'workload_kind', type=click.Choice(['refinement', 'combination']),
              default='refinement', help='Refinement-tree sampling or atom combinations')
@click.option('--pool-size', type=int, default=4, help='Atom pool size of the combination workload')
@click.option('--strict', is_flag=True, help='Reject KB assertions on undeclared names')
@latency_options
@click.option('--out', type=click.Path(dir_okay=False), default=None,
              help='Output CSV (default: stdout)')
def bench_retrieve(kb_path, count, max_length, seed, dup, strategies, policies, fractions, warm,
                   workload_kind, pool_size, strict, latency_get_us, latency_check_us, real_sleep, out):
    """Sweep strategies × policies × capacity fractions × warm/cold over one workload."""
    strategy_list = _split(strategies, RetrievalStrategy.from_name, '--strategies')
    policy_list = _split(policies, EvictionPolicy.from_name, '--policies')
    fraction_list = parse_fractions(fractions)
    warm_list = {'both': [False, True], 'on': [True], 'off': [False]}[warm]
    reasoner_config = _reasoner_config(latency_get_us, latency_check_us, real_sleep)
    try:
        spec = WorkloadSpec(count=count, max_length=max_length, seed=seed, duplication_factor=dup)
    except ConfigurationError as e:
        raise click.BadParameter(e.message)

    kb = load_kb(kb_path, strict=strict)
    if workload_kind == 'combination':
        try:
            workload = generate_combination_workload(kb, count, seed=seed, pool_size=pool_size)
        except ConfigurationError as e:
            raise click.BadParameter(e.message, param_hint='--pool-size')
    else:
        workload = generate_workload(kb, spec)

    rows = run_retrieval_benchmark(kb, spec, policy_list, fraction_list, strategy_list, warm_list,
                                   reasoner_config, workload=workload)
    _write(rows, out)


@bench.command('learn')
@click.option('--kb', 'kb_path', required=True, type=click.Path(exists=True, dir_okay=False),
              help='Knowledge base file')
@click.option('--lp', 'lp_paths', multiple=True, type=click.Path(exists=True, dir_okay=False),
              help='Learning problem file (repeatable)')
@click.option('--strategies', default='none,simple,semantic', help='Comma-separated strategies')
@click.option('--capacity', type=int, default=lambda: config.cache.max_size,
              help='Cache capacity in concepts')
@click.option('--policy', default=lambda: config.cache.policy.value, help='Eviction policy')
@click.option('--warm/--cold', default=lambda: config.cache.warm_start,
              help='Initialize the cache before learning')
@click.option('--max-iterations', type=int, default=lambda: config.learner.max_iterations,
              help='Search iterations')
@click.option('--max-length', type=int, default=lambda: config.learner.max_length,
              help='Maximum hypothesis length')
@click.option('--strict', is_flag=True, help='Reject KB assertions on undeclared names')
@latency_options
@click.option('--out', type=click.Path(dir_okay=False), default=None,
              help='Output CSV (default: stdout)')
def bench_learn(kb_path, lp_paths, strategies, capacity, policy, warm, max_iterations, max_length,
                strict, latency_get_us, latency_check_us, real_sleep, out):
    """Run the concept learner per learning problem × strategy."""
    strategy_list = _split(strategies, RetrievalStrategy.from_name, '--strategies')
    eviction = _split(policy, EvictionPolicy.from_name, '--policy')[0]
    reasoner_config = _reasoner_config(latency_get_us, latency_check_us, real_sleep)
    try:
        learner_config = LearnerConfig(
            max_iterations=max_iterations,
            max_length=max_length,
            cache_config=CacheConfig(max_size=capacity, policy=eviction, warm_start=warm,
                                     rng_seed=config.cache.rng_seed),
            length_penalty=config.learner.length_penalty,
        )
    except ConfigurationError as e:
        raise click.BadParameter(e.message)

    kb = load_kb(kb_path, strict=strict)
    lps = [load_learning_problem(path) for path in lp_paths]
    rows = run_learning_benchmark(kb, lps, strategy_list, capacity=capacity, policy=eviction,
                                  learner_config=learner_config, reasoner_config=reasoner_config)
    _write(rows, out, learning=True)


# ============================================================================
# ONE-SHOT RETRIEVAL
# ============================================================================

@cli.group()
def retrieve():
    """Query a knowledge base directly."""
    pass


@retrieve.command('eval')
@click.option('--kb', 'kb_path', required=True, type=click.Path(exists=True, dir_okay=False),
              help='Knowledge base file')
@click.option('--concept', 'expression', required=True, help='Concept expression, e.g. "hasChild some Female"')
@click.option('--strategy', default='semantic', help='Retrieval strategy')
@click.option('--strict', is_flag=True, help='Reject KB assertions on undeclared names')
def retrieve_eval(kb_path, expression, strategy, strict):
    """Print the instances of a concept, sorted, one per line."""
    retrieval_strategy = _split(strategy, RetrievalStrategy.from_name, '--strategy')[0]
    concept = parse(expression)
    kb = load_kb(kb_path, strict=strict)
    context = build_context(materialize(kb), retrieval_strategy)
    for individual in sorted(context.retrieve(concept)):
        click.echo(individual)
    stats = context.reasoner_stats()
    logger.info(f"{stats.get_instances_calls} getInstances, {stats.check_calls} checks",
                extra={'kb': kb.name, 'strategy': retrieval_strategy.value})


if __name__ == '__main__':
    cli()

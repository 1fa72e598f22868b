"""Seeded query workloads for the retrieval benchmark.

Two generators:

* refinement-tree sampling: random walks from ⊤ through ``learner.refine``,
  then duplicates re-injected until the requested count is reached;
* combination workloads: conjunctions and disjunctions over a small shared
  pool of atoms, where structure-aware caching pays off most.
"""

import random
from dataclasses import dataclass
from typing import Callable, Dict, List

from core.exceptions import ConfigurationError
from concepts import (
    And, Atomic, BOTTOM, CanonicalKey, Concept, Exists, ForAll, Not, Or, TOP,
    canonicalize
)
from knowledge_base import KnowledgeBase
from learner import refine
from utils.logging import get_logger

logger = get_logger(__name__)

RESTART_PROBABILITY = 0.3
STEPS_PER_CONCEPT = 50


@dataclass(frozen=True)
class WorkloadSpec:
    """Size, length bound, seed and duplicate share of a workload."""
    count: int = 200
    max_length: int = 10
    seed: int = 42
    duplication_factor: float = 0.5

    def __post_init__(self):
        if self.count < 1:
            raise ConfigurationError(f"Workload count must be >= 1, got {self.count}")
        if self.max_length < 1:
            raise ConfigurationError(f"Workload max_length must be >= 1, got {self.max_length}")
        if not 0 <= self.duplication_factor < 1:
            raise ConfigurationError(
                f"Duplication factor must be in [0, 1), got {self.duplication_factor}")

    @property
    def distinct_target(self) -> int:
        return max(1, round(self.count * (1 - self.duplication_factor)))


def distinct_count(workload: List[Concept], key_fn: Callable[[Concept], CanonicalKey] = canonicalize) -> int:
    """Number of different queries in a workload, up to ``key_fn``."""
    return len({key_fn(c) for c in workload})


def _fill_with_duplicates(pool: List[Concept], count: int, rng: random.Random) -> List[Concept]:
    workload = list(pool)
    while len(workload) < count:
        workload.append(rng.choice(pool))
    rng.shuffle(workload)
    return workload


def generate_workload(kb: KnowledgeBase, spec: WorkloadSpec) -> List[Concept]:
    """Sample a workload from the refinement tree rooted at ⊤.

    Random walks pick a uniformly random refinement at each step and jump
    back to ⊤ with a fixed restart probability; ⊤ itself is never emitted.
    The walk stops once ``spec.distinct_target`` distinct concepts are
    found (or the step budget runs out on a small signature).
    """
    rng = random.Random(spec.seed)
    children: Dict[Concept, List[Concept]] = {}
    distinct: Dict[CanonicalKey, Concept] = {}
    target = spec.distinct_target
    budget = target * STEPS_PER_CONCEPT
    current = TOP

    for _ in range(budget):
        if len(distinct) >= target:
            break
        if current not in children:
            children[current] = refine(current, kb, spec.max_length)
        options = children[current]
        if not options or (current is not TOP and rng.random() < RESTART_PROBABILITY):
            current = TOP
            continue
        current = rng.choice(options)
        distinct.setdefault(canonicalize(current), current)

    pool = list(distinct.values())
    if not pool:
        logger.warning(f"Knowledge base {kb.name} yields no refinements; workload is empty",
                       extra={'kb': kb.name})
        return []
    if len(pool) < target:
        logger.warning(f"Only {len(pool)} distinct concepts found (wanted {target})", extra={'kb': kb.name})

    workload = _fill_with_duplicates(pool, spec.count, rng)
    logger.info(f"Generated workload of {len(workload)} queries ({len(pool)} distinct)",
                extra={'kb': kb.name})
    return workload


def _grow(rng: random.Random, kb: KnowledgeBase, budget: int) -> Concept:
    kinds = ['leaf']
    if budget >= 2:
        kinds.append('not')
    if budget >= 3:
        kinds += ['and', 'or']
        if kb.roles:
            kinds += ['some', 'only']
    kind = rng.choice(kinds)

    if kind == 'leaf':
        if not kb.atomic_concepts or rng.random() < 0.1:
            return rng.choice((TOP, BOTTOM))
        return Atomic(rng.choice(kb.atomic_concepts))
    if kind == 'not':
        return Not(_grow(rng, kb, budget - 1))
    if kind in ('and', 'or'):
        left = rng.randint(1, budget - 2)
        op = And if kind == 'and' else Or
        return op(_grow(rng, kb, left), _grow(rng, kb, budget - 1 - left))
    role = rng.choice(kb.roles)
    restriction = Exists if kind == 'some' else ForAll
    return restriction(role, _grow(rng, kb, budget - 2))


def random_concept(rng: random.Random, kb: KnowledgeBase, max_length: int = 10) -> Concept:
    """Uniformly shaped random ALC concept over the KB signature, length ≤ max_length."""
    return _grow(rng, kb, rng.randint(1, max_length))


def generate_combination_workload(
    kb: KnowledgeBase,
    count: int,
    seed: int = 42,
    pool_size: int = 4,
) -> List[Concept]:
    """Conjunctions and disjunctions of 2 or 3 atoms from a shared pool.

    Operand order is drawn at random, so the same set may show up in several
    syntactic orders. Some operands are negated.
    """
    if count < 1:
        raise ConfigurationError(f"Workload count must be >= 1, got {count}")
    if pool_size < 2 or pool_size > len(kb.atomic_concepts):
        raise ConfigurationError(
            f"Pool size must be between 2 and {len(kb.atomic_concepts)}, got {pool_size}")

    rng = random.Random(seed)
    pool = [Atomic(a) for a in rng.sample(kb.atomic_concepts, pool_size)]
    workload = []
    for _ in range(count):
        arity = rng.choice((2, 3)) if pool_size >= 3 else 2
        operands: List[Concept] = rng.sample(pool, arity)
        operands = [Not(a) if rng.random() < 0.2 else a for a in operands]
        op = And if rng.random() < 0.6 else Or
        concept = operands[0]
        for operand in operands[1:]:
            concept = op(concept, operand)
        workload.append(concept)
    return workload

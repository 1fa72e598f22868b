"""Top-down refinement-based concept learner (CELOE-style best-first search).

Retrieval goes through a pluggable strategy (none / simple / semantic); the
strategy changes the cost of the search, never its trajectory or result.
"""

import heapq
from dataclasses import dataclass
from pathlib import Path
from typing import FrozenSet, List, NamedTuple, Optional, Union

from core.config_manager import LearnerConfig, ReasonerConfig, config
from core.exceptions import InvalidLearningProblemError, LearningProblemParseError
from caching import CacheStats
from concepts import (
    And, Atomic, Bottom, Concept, Exists, ForAll, Not, Or, TOP, Top,
    canonicalize, is_valid_name, length, render
)
from knowledge_base import Interpretation, KnowledgeBase, materialize
from reasoner import ReasonerStats
from retrieval import build_context
from utils.logging import OperationTracker, get_logger

logger = get_logger(__name__)


@dataclass(frozen=True)
class LearningProblem:
    """Positive and negative example individuals."""
    positives: FrozenSet[str]
    negatives: FrozenSet[str]
    name: str = 'lp'

    def validate(self, kb: KnowledgeBase) -> None:
        """Check E+ ≠ ∅, E+ ∩ E− = ∅ and E+ ∪ E− ⊆ N_I."""
        if not self.positives:
            raise InvalidLearningProblemError(f"Learning problem '{self.name}' has no positive examples")
        overlap = self.positives & self.negatives
        if overlap:
            raise InvalidLearningProblemError(
                f"Learning problem '{self.name}' labels individuals both ways",
                {'individuals': sorted(overlap)})
        unknown = (self.positives | self.negatives) - set(kb.individuals)
        if unknown:
            raise InvalidLearningProblemError(
                f"Learning problem '{self.name}' uses individuals outside the KB",
                {'individuals': sorted(unknown)})


def parse_learning_problem(text: str, name: str = 'lp') -> LearningProblem:
    """Parse ``positive <individual>`` / ``negative <individual>`` lines."""
    positives = []
    negatives = []
    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2 or parts[0] not in ('positive', 'negative'):
            raise LearningProblemParseError(f"expected 'positive <name>' or 'negative <name>', got '{line}'",
                                            line_number)
        if not is_valid_name(parts[1]):
            raise LearningProblemParseError(f"invalid individual name '{parts[1]}'", line_number)
        (positives if parts[0] == 'positive' else negatives).append(parts[1])
    return LearningProblem(frozenset(positives), frozenset(negatives), name=name)


def load_learning_problem(path: Union[str, Path]) -> LearningProblem:
    """Load a learning problem file; the problem is named after the file stem."""
    path = Path(path)
    return parse_learning_problem(path.read_text(encoding='utf-8'), name=path.stem)


# ---------------------------------------------------------------------------
# Refinement operator
# ---------------------------------------------------------------------------

def _refine_top(kb: KnowledgeBase) -> List[Concept]:
    atoms = [Atomic(a) for a in kb.atomic_concepts]
    return (
        atoms
        + [Not(a) for a in atoms]
        + [Exists(r, TOP) for r in kb.roles]
        + [ForAll(r, TOP) for r in kb.roles]
    )


def _refine(concept: Concept, kb: KnowledgeBase, budget: int) -> List[Concept]:
    """Downward refinements of ``concept`` no longer than ``budget``."""
    if budget < 1:
        return []
    if isinstance(concept, Top):
        out = _refine_top(kb)
    elif isinstance(concept, Bottom):
        out = []
    elif isinstance(concept, Atomic):
        out = [Atomic(sub) for sub in kb.direct_subclasses(concept.name)]
        if budget >= 1 + length(concept) + 1:
            out += [And(concept, d) for d in _refine(TOP, kb, budget - 1 - length(concept))]
    elif isinstance(concept, Not):
        if isinstance(concept.arg, Atomic):
            # A ⊑ B gives ¬B ⊑ ¬A
            out = [Not(Atomic(sup)) for sup in kb.direct_superclasses(concept.arg.name)]
        else:
            out = []
    elif isinstance(concept, (Exists, ForAll)):
        inner = budget - 2
        out = [type(concept)(concept.role, d) for d in _refine(concept.filler, kb, inner)]
    elif isinstance(concept, (And, Or)):
        op = type(concept)
        left_budget = budget - 1 - length(concept.right)
        right_budget = budget - 1 - length(concept.left)
        out = [op(d, concept.right) for d in _refine(concept.left, kb, left_budget)]
        out += [op(concept.left, d) for d in _refine(concept.right, kb, right_budget)]
    else:
        raise TypeError(f"Not a concept: {concept!r}")
    return [c for c in out if length(c) <= budget]


def refine(concept: Concept, kb: KnowledgeBase, max_length: int) -> List[Concept]:
    """Refinements of ``concept`` within ``max_length``, in deterministic order.

    Besides the downward steps, C ⊔ A is offered once per atom A at the top
    level (not for ⊤, ⊥ or concepts that already are disjunctions).
    Duplicates up to canonical keys are dropped, first occurrence wins.
    """
    if length(concept) > max_length:
        return []
    candidates = _refine(concept, kb, max_length)
    if not isinstance(concept, (Top, Bottom, Or)):
        candidates += [Or(concept, Atomic(a)) for a in kb.atomic_concepts]

    seen = set()
    refinements = []
    for candidate in candidates:
        if length(candidate) > max_length:
            continue
        key = canonicalize(candidate)
        if key in seen:
            continue
        seen.add(key)
        refinements.append(candidate)
    return refinements


# ---------------------------------------------------------------------------
# Quality and search
# ---------------------------------------------------------------------------

def f1(retrieved: FrozenSet[str], lp: LearningProblem) -> float:
    """F1 of a retrieval result against the labeled examples (0 if undefined)."""
    tp = len(retrieved & lp.positives)
    fp = len(retrieved & lp.negatives)
    fn = len(lp.positives - retrieved)
    denominator = 2 * tp + fp + fn
    if denominator == 0:
        return 0.0
    return 2 * tp / denominator


@dataclass(frozen=True)
class SearchNode:
    """A scored hypothesis in the search tree."""
    concept: Concept
    quality: float
    length: int
    heuristic_score: float

    @property
    def rendered(self) -> str:
        return render(self.concept)


class LearningResult(NamedTuple):
    best: SearchNode
    stats: ReasonerStats
    cache_stats: CacheStats
    iterations: int


def _better(candidate: SearchNode, incumbent: SearchNode) -> bool:
    """Higher quality wins, then shorter, then lexicographically smaller rendering."""
    return (-candidate.quality, candidate.length, candidate.rendered) < \
        (-incumbent.quality, incumbent.length, incumbent.rendered)


def learn(
    kb: KnowledgeBase,
    lp: LearningProblem,
    cfg: LearnerConfig = None,
    reasoner_config: ReasonerConfig = None,
    interp: Optional[Interpretation] = None,
) -> LearningResult:
    """Best-first search from ⊤ for a concept separating E+ from E−.

    Each iteration pops the node with the highest heuristic
    (quality − length_penalty · length; ties by rendered form), scores all of
    its new refinements and stops once a node of quality 1.0 is known or the
    iteration budget is spent. Without ``cfg`` the learner settings from the
    environment apply.
    """
    cfg = cfg or config.learner
    lp.validate(kb)
    interp = interp or materialize(kb)
    context = build_context(interp, cfg.retrieval_strategy, cfg.cache_config, reasoner_config)

    with OperationTracker(logger, 'learn', kb=kb.name, lp=lp.name,
                          strategy=cfg.retrieval_strategy.value):
        if cfg.cache_config.warm_start:
            context.initialize(kb)

        def score(concept: Concept) -> SearchNode:
            quality = f1(context.retrieve(concept), lp)
            size = length(concept)
            return SearchNode(concept, quality, size, quality - cfg.length_penalty * size)

        root = score(TOP)
        best = root
        frontier = [(-root.heuristic_score, root.rendered, root)]
        seen = {canonicalize(TOP)}
        iterations = 0

        while iterations < cfg.max_iterations and frontier and best.quality < 1.0:
            _, _, node = heapq.heappop(frontier)
            iterations += 1
            for refinement in refine(node.concept, kb, cfg.max_length):
                key = canonicalize(refinement)
                if key in seen:
                    continue
                seen.add(key)
                child = score(refinement)
                heapq.heappush(frontier, (-child.heuristic_score, child.rendered, child))
                if _better(child, best):
                    best = child

    logger.info(f"Learned {best.rendered} (F1={best.quality:.4f}) after {iterations} iterations",
                extra={'kb': kb.name, 'lp': lp.name, 'strategy': cfg.retrieval_strategy.value})
    return LearningResult(best, context.reasoner_stats(), context.cache_stats(), iterations)

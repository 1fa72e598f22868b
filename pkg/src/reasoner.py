"""Set-semantics oracle for ALC retrieval and an instrumented reasoner around it."""

import logging
import threading
import time
from dataclasses import dataclass
from typing import FrozenSet

from core.config_manager import ReasonerConfig
from core.exceptions import UnknownNameError
from concepts import (
    Atomic, And, Bottom, Concept, Exists, ForAll, Not, Or, Top, concept_names
)
from knowledge_base import Interpretation

logger = logging.getLogger(__name__)


def check_signature(interp: Interpretation, concept: Concept) -> None:
    """Raise UnknownNameError if ``concept`` uses a name outside the signature."""
    atoms, roles = concept_names(concept)
    for name in sorted(atoms):
        if name not in interp.concept_extensions:
            raise UnknownNameError('concept', name)
    for role in sorted(roles):
        if role not in interp.role_extensions:
            raise UnknownNameError('role', role)


def _extension(interp: Interpretation, name: str) -> FrozenSet[str]:
    try:
        return interp.concept_extensions[name]
    except KeyError:
        raise UnknownNameError('concept', name)


def _pairs(interp: Interpretation, role: str) -> FrozenSet:
    try:
        return interp.role_extensions[role]
    except KeyError:
        raise UnknownNameError('role', role)


def _successors(interp: Interpretation, role: str, individual: str) -> FrozenSet[str]:
    if role not in interp.role_extensions:
        raise UnknownNameError('role', role)
    return interp.successors.get(role, {}).get(individual, frozenset())


def evaluate(interp: Interpretation, concept: Concept) -> FrozenSet[str]:
    """Instances of ``concept`` under closed-world set semantics over N_I."""
    if isinstance(concept, Top):
        return interp.domain
    if isinstance(concept, Bottom):
        return frozenset()
    if isinstance(concept, Atomic):
        return _extension(interp, concept.name)
    if isinstance(concept, Not):
        return interp.domain - evaluate(interp, concept.arg)
    if isinstance(concept, And):
        return evaluate(interp, concept.left) & evaluate(interp, concept.right)
    if isinstance(concept, Or):
        return evaluate(interp, concept.left) | evaluate(interp, concept.right)
    if isinstance(concept, Exists):
        pairs = _pairs(interp, concept.role)
        filler = evaluate(interp, concept.filler)
        return frozenset(x for x, y in pairs if y in filler)
    if isinstance(concept, ForAll):
        _pairs(interp, concept.role)
        filler = evaluate(interp, concept.filler)
        return frozenset(
            x for x in interp.individuals
            if _successors(interp, concept.role, x) <= filler
        )
    raise TypeError(f"Not a concept: {concept!r}")


def is_instance(interp: Interpretation, concept: Concept, individual: str) -> bool:
    """Instance check: does ``individual`` belong to ``concept``?"""
    if isinstance(concept, Top):
        return True
    if isinstance(concept, Bottom):
        return False
    if isinstance(concept, Atomic):
        return individual in _extension(interp, concept.name)
    if isinstance(concept, Not):
        return not is_instance(interp, concept.arg, individual)
    if isinstance(concept, And):
        return is_instance(interp, concept.left, individual) and is_instance(interp, concept.right, individual)
    if isinstance(concept, Or):
        return is_instance(interp, concept.left, individual) or is_instance(interp, concept.right, individual)
    if isinstance(concept, Exists):
        return any(is_instance(interp, concept.filler, b)
                   for b in _successors(interp, concept.role, individual))
    if isinstance(concept, ForAll):
        return all(is_instance(interp, concept.filler, b)
                   for b in _successors(interp, concept.role, individual))
    raise TypeError(f"Not a concept: {concept!r}")


@dataclass(frozen=True)
class ReasonerStats:
    """Call counters and accumulated cost of an instrumented reasoner."""
    get_instances_calls: int = 0
    check_calls: int = 0
    simulated_latency_us: float = 0.0
    wall_time_us: float = 0.0


class InstrumentedReasoner:
    """Oracle-backed reasoner that counts calls and charges synthetic latency.

    Latency is accrued on a virtual clock; with ``real_sleep`` the process also
    sleeps for it. No results are memoized here, so every saving observed in a
    benchmark comes from the cache in front of it. Counter updates are
    serialized with a lock.
    """

    def __init__(self, interp: Interpretation, config: ReasonerConfig = None):
        self.interp = interp
        self.config = config or ReasonerConfig()
        self._lock = threading.Lock()
        self._get_instances_calls = 0
        self._check_calls = 0
        self._simulated_us = 0.0
        self._wall_us = 0.0

    def _charge(self, latency_us: float, started: float, get_instances: bool) -> None:
        if self.config.real_sleep and latency_us > 0:
            time.sleep(latency_us / 1_000_000)
        elapsed = (time.perf_counter() - started) * 1_000_000
        with self._lock:
            if get_instances:
                self._get_instances_calls += 1
            else:
                self._check_calls += 1
            self._simulated_us += latency_us
            self._wall_us += elapsed

    def get_instances(self, concept: Concept) -> FrozenSet[str]:
        """Full retrieval of ``concept``."""
        started = time.perf_counter()
        result = evaluate(self.interp, concept)
        self._charge(self.config.latency_get_instances_us, started, get_instances=True)
        return result

    def check(self, role: str, subject: str, obj: str) -> bool:
        """Role assertion check r(a, b) under the closed world."""
        started = time.perf_counter()
        if role not in self.interp.role_extensions:
            raise UnknownNameError('role', role)
        result = obj in self.interp.successors.get(role, {}).get(subject, frozenset())
        self._charge(self.config.latency_check_us, started, get_instances=False)
        return result

    def is_instance(self, concept: Concept, individual: str) -> bool:
        """Instance check C(a), charged as one check call."""
        started = time.perf_counter()
        result = is_instance(self.interp, concept, individual)
        self._charge(self.config.latency_check_us, started, get_instances=False)
        return result

    def reset_stats(self) -> None:
        with self._lock:
            self._get_instances_calls = 0
            self._check_calls = 0
            self._simulated_us = 0.0
            self._wall_us = 0.0

    def snapshot_stats(self) -> ReasonerStats:
        with self._lock:
            return ReasonerStats(
                get_instances_calls=self._get_instances_calls,
                check_calls=self._check_calls,
                simulated_latency_us=self._simulated_us,
                wall_time_us=self._wall_us,
            )

"""Knowledge base loading and materialization of atomic extensions.

KB files are line-based UTF-8; ``#`` starts a comment::

    class <Name>                    declare atomic concept
    role <Name>                     declare role
    individual <Name>               declare individual
    subclass <A> <B>                axiom A ⊑ B
    type <Individual> <Class>       class assertion
    rel <Role> <From> <To>          role assertion
"""

import logging
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Set, Tuple, Union

from core.exceptions import DanglingNameError, KBParseError
from concepts import is_valid_name

logger = logging.getLogger(__name__)

_ARITY = {
    'class': 1,
    'role': 1,
    'individual': 1,
    'subclass': 2,
    'type': 2,
    'rel': 3,
}


@dataclass(frozen=True)
class KnowledgeBase:
    """Signature, ABox and atomic TBox of a finite knowledge base."""
    individuals: Tuple[str, ...] = ()
    atomic_concepts: Tuple[str, ...] = ()
    roles: Tuple[str, ...] = ()
    class_assertions: FrozenSet[Tuple[str, str]] = frozenset()
    role_assertions: FrozenSet[Tuple[str, str, str]] = frozenset()
    subclass_axioms: FrozenSet[Tuple[str, str]] = frozenset()
    name: str = 'kb'

    def direct_subclasses(self, concept_name: str) -> List[str]:
        """Declared subclasses B of A (axioms B ⊑ A), in signature order."""
        subs = {sub for sub, sup in self.subclass_axioms if sup == concept_name and sub != concept_name}
        return [c for c in self.atomic_concepts if c in subs]

    def direct_superclasses(self, concept_name: str) -> List[str]:
        """Declared superclasses B of A (axioms A ⊑ B), in signature order."""
        sups = {sup for sub, sup in self.subclass_axioms if sub == concept_name and sup != concept_name}
        return [c for c in self.atomic_concepts if c in sups]

    def summary(self) -> Dict[str, int]:
        return {
            'individuals': len(self.individuals),
            'classes': len(self.atomic_concepts),
            'roles': len(self.roles),
            'class_assertions': len(self.class_assertions),
            'role_assertions': len(self.role_assertions),
            'subclass_axioms': len(self.subclass_axioms),
        }


@dataclass(frozen=True)
class Interpretation:
    """Closed-world interpretation over the named individuals of a KB."""
    individuals: Tuple[str, ...]
    concept_extensions: Mapping[str, FrozenSet[str]]
    role_extensions: Mapping[str, FrozenSet[Tuple[str, str]]]
    successors: Mapping[str, Mapping[str, FrozenSet[str]]] = field(repr=False, default_factory=dict)
    index: Mapping[str, int] = field(repr=False, default_factory=dict)

    @property
    def domain(self) -> FrozenSet[str]:
        return frozenset(self.individuals)

    def ordered(self, individuals: Iterable[str]) -> List[str]:
        """Sort individuals by their position in the KB (deterministic iteration)."""
        return sorted(individuals, key=self.index.__getitem__)


class _SignatureBuilder:
    """Accumulates declarations and assertions while a KB file is read."""

    def __init__(self, strict: bool):
        self.strict = strict
        self.sets: Dict[str, Dict[str, None]] = {'class': {}, 'role': {}, 'individual': {}}
        self.class_assertions: Set[Tuple[str, str]] = set()
        self.role_assertions: Set[Tuple[str, str, str]] = set()
        self.subclass_axioms: Set[Tuple[str, str]] = set()

    def declare(self, kind: str, name: str) -> None:
        self.sets[kind].setdefault(name, None)

    def use(self, kind: str, name: str, line_number: int) -> None:
        if name not in self.sets[kind]:
            if self.strict:
                raise DanglingNameError(kind, name, line_number)
            self.sets[kind][name] = None

    def build(self, name: str) -> KnowledgeBase:
        return KnowledgeBase(
            individuals=tuple(self.sets['individual']),
            atomic_concepts=tuple(self.sets['class']),
            roles=tuple(self.sets['role']),
            class_assertions=frozenset(self.class_assertions),
            role_assertions=frozenset(self.role_assertions),
            subclass_axioms=frozenset(self.subclass_axioms),
            name=name,
        )


def parse_kb(text: str, strict: bool = False, name: str = 'kb') -> KnowledgeBase:
    """Parse KB text.

    Signature sets are the union of declared and used names in first-seen
    order. In strict mode an assertion or axiom naming an undeclared entity
    raises DanglingNameError (names must be declared on an earlier line).
    """
    builder = _SignatureBuilder(strict)

    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        directive, *args = line.split()
        if directive not in _ARITY:
            raise KBParseError(f"unknown directive '{directive}'", line_number)
        if len(args) != _ARITY[directive]:
            raise KBParseError(
                f"'{directive}' expects {_ARITY[directive]} argument(s), got {len(args)}", line_number)
        for arg in args:
            if not is_valid_name(arg):
                raise KBParseError(f"invalid name '{arg}'", line_number)

        if directive in ('class', 'role', 'individual'):
            builder.declare(directive, args[0])
        elif directive == 'subclass':
            builder.use('class', args[0], line_number)
            builder.use('class', args[1], line_number)
            builder.subclass_axioms.add((args[0], args[1]))
        elif directive == 'type':
            builder.use('individual', args[0], line_number)
            builder.use('class', args[1], line_number)
            builder.class_assertions.add((args[1], args[0]))
        else:
            builder.use('role', args[0], line_number)
            builder.use('individual', args[1], line_number)
            builder.use('individual', args[2], line_number)
            builder.role_assertions.add((args[0], args[1], args[2]))

    return builder.build(name)


def load_kb(path: Union[str, Path], strict: bool = False) -> KnowledgeBase:
    """Load a KB file; the KB is named after the file stem."""
    path = Path(path)
    kb = parse_kb(path.read_text(encoding='utf-8'), strict=strict, name=path.stem)
    logger.info(f"Loaded knowledge base {kb.name}: {kb.summary()}")
    return kb


def _strongly_connected_components(nodes: List[str], edges: Mapping[str, List[str]]) -> List[List[str]]:
    """Iterative Tarjan; components come out in reverse topological order."""
    index_of: Dict[str, int] = {}
    lowlink: Dict[str, int] = {}
    on_stack: Set[str] = set()
    stack: List[str] = []
    components: List[List[str]] = []
    counter = 0

    for root in nodes:
        if root in index_of:
            continue
        work = [(root, iter(edges.get(root, ())))]
        index_of[root] = lowlink[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            node, successors = work[-1]
            advanced = False
            for succ in successors:
                if succ not in index_of:
                    index_of[succ] = lowlink[succ] = counter
                    counter += 1
                    stack.append(succ)
                    on_stack.add(succ)
                    work.append((succ, iter(edges.get(succ, ()))))
                    advanced = True
                    break
                if succ in on_stack:
                    lowlink[node] = min(lowlink[node], index_of[succ])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                lowlink[parent] = min(lowlink[parent], lowlink[node])
            if lowlink[node] == index_of[node]:
                component = []
                while True:
                    member = stack.pop()
                    on_stack.discard(member)
                    component.append(member)
                    if member == node:
                        break
                components.append(component)
    return components


def superclass_closure(kb: KnowledgeBase) -> Dict[str, FrozenSet[str]]:
    """Reflexive-transitive closure of the subclass relation (A ↦ {B | A ⊑* B}).

    Cycles are collapsed into strongly connected components first, so every
    member of a cycle gets the same (equivalent) closure.
    """
    edges: Dict[str, List[str]] = {c: [] for c in kb.atomic_concepts}
    for sub, sup in sorted(kb.subclass_axioms):
        edges.setdefault(sub, []).append(sup)

    components = _strongly_connected_components(list(edges), edges)
    component_of = {member: i for i, comp in enumerate(components) for member in comp}
    closure_of_component: List[FrozenSet[str]] = []

    # Reverse topological order: every successor component is finished first
    for i, component in enumerate(components):
        reached = set(component)
        for member in component:
            for sup in edges.get(member, ()):
                j = component_of[sup]
                if j != i:
                    reached |= closure_of_component[j]
        closure_of_component.append(frozenset(reached))

    return {c: closure_of_component[component_of[c]] for c in edges}


def materialize(kb: KnowledgeBase) -> Interpretation:
    """Compute atomic extensions under the subclass hierarchy.

    extension(A) = {a | B(a) asserted, B ⊑* A}; role extensions are copied
    verbatim.
    """
    closure = superclass_closure(kb)
    extensions: Dict[str, Set[str]] = {c: set() for c in kb.atomic_concepts}
    for concept_name, individual in kb.class_assertions:
        for sup in closure.get(concept_name, (concept_name,)):
            extensions.setdefault(sup, set()).add(individual)

    role_extensions: Dict[str, Set[Tuple[str, str]]] = {r: set() for r in kb.roles}
    successors: Dict[str, Dict[str, Set[str]]] = {r: {} for r in kb.roles}
    for role, subject, obj in kb.role_assertions:
        role_extensions.setdefault(role, set()).add((subject, obj))
        successors.setdefault(role, {}).setdefault(subject, set()).add(obj)

    return Interpretation(
        individuals=kb.individuals,
        concept_extensions={c: frozenset(s) for c, s in extensions.items()},
        role_extensions={r: frozenset(s) for r, s in role_extensions.items()},
        successors={r: {a: frozenset(bs) for a, bs in succ.items()} for r, succ in successors.items()},
        index={ind: i for i, ind in enumerate(kb.individuals)},
    )


def random_kb(
    seed: int,
    n_individuals: int = 20,
    n_classes: int = 6,
    n_roles: int = 2,
    type_probability: float = 0.3,
    edge_probability: float = 0.1,
    with_cycle: bool = False,
    name: Optional[str] = None,
) -> KnowledgeBase:
    """Generate a synthetic KB with a random class forest and random assertions."""
    rng = random.Random(seed)
    classes = [f"C{i}" for i in range(n_classes)]
    roles = [f"r{i}" for i in range(n_roles)]
    individuals = [f"i{i}" for i in range(n_individuals)]

    axioms = set()
    for i in range(1, n_classes):
        if rng.random() < 0.7:
            axioms.add((classes[i], classes[rng.randrange(i)]))
    if with_cycle and n_classes >= 2:
        axioms.add((classes[0], classes[n_classes - 1]))
        axioms.add((classes[n_classes - 1], classes[0]))

    class_assertions = {(c, ind) for ind in individuals for c in classes if rng.random() < type_probability}
    role_assertions = {
        (r, a, b)
        for r in roles for a in individuals for b in individuals
        if rng.random() < edge_probability
    }

    return KnowledgeBase(
        individuals=tuple(individuals),
        atomic_concepts=tuple(classes),
        roles=tuple(roles),
        class_assertions=frozenset(class_assertions),
        role_assertions=frozenset(role_assertions),
        subclass_axioms=frozenset(axioms),
        name=name or f"random-{seed}",
    )


def dump_kb(kb: KnowledgeBase) -> str:
    """Render a KB in the line-based file format (declarations first)."""
    lines = [f"# {kb.name}"]
    lines.extend(f"class {c}" for c in kb.atomic_concepts)
    lines.extend(f"role {r}" for r in kb.roles)
    lines.extend(f"individual {i}" for i in kb.individuals)
    lines.extend(f"subclass {a} {b}" for a, b in sorted(kb.subclass_axioms))
    lines.extend(f"type {ind} {c}" for c, ind in sorted(kb.class_assertions, key=lambda p: (p[1], p[0])))
    lines.extend(f"rel {r} {a} {b}" for r, a, b in sorted(kb.role_assertions))
    return '\n'.join(lines) + '\n'

"""ALC concept syntax trees, their Manchester-style grammar and canonical cache keys.

Grammar::

    concept := disj
    disj    := conj { "or" conj }
    conj    := unary { "and" unary }
    unary   := "not" unary | ROLE "some" unary | ROLE "only" unary
             | "(" concept ")" | "Top" | "Bottom" | NAME

``and``/``or`` are left-associative; ``not``/``some``/``only`` bind tighter
than ``and``, which binds tighter than ``or``.
"""

import re
from dataclasses import dataclass
from functools import lru_cache
from typing import List, Optional, Tuple, Union

from core.exceptions import ConceptSyntaxError

KEYWORDS = frozenset({'and', 'or', 'not', 'some', 'only', 'Top', 'Bottom'})
NAME_PATTERN = re.compile(r'[A-Za-z_][A-Za-z0-9_]*\Z')

_TOKEN_RE = re.compile(r'\s*(?:(?P<name>[A-Za-z_][A-Za-z0-9_]*)|(?P<punct>[()])|(?P<bad>\S))')


class Concept:
    """Base class of every ALC concept node."""

    __slots__ = ()

    def __str__(self) -> str:
        return render(self)


@dataclass(frozen=True)
class Top(Concept):
    pass


@dataclass(frozen=True)
class Bottom(Concept):
    pass


@dataclass(frozen=True)
class Atomic(Concept):
    name: str


@dataclass(frozen=True)
class Not(Concept):
    arg: Concept


@dataclass(frozen=True)
class And(Concept):
    left: Concept
    right: Concept


@dataclass(frozen=True)
class Or(Concept):
    left: Concept
    right: Concept


@dataclass(frozen=True)
class Exists(Concept):
    role: str
    filler: Concept


@dataclass(frozen=True)
class ForAll(Concept):
    role: str
    filler: Concept


TOP = Top()
BOTTOM = Bottom()

CanonicalKey = bytes
Restriction = Union[Exists, ForAll]


def is_valid_name(name: str) -> bool:
    """True for identifiers usable as concept, role or individual names."""
    return bool(NAME_PATTERN.match(name)) and name not in KEYWORDS


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

class _Parser:
    """Recursive descent parser over a pre-tokenized concept expression."""

    def __init__(self, text: str):
        self.text = text
        self.tokens = self._tokenize(text)
        self.pos = 0

    def _tokenize(self, text: str) -> List[Tuple[str, int]]:
        tokens = []
        index = 0
        while index < len(text):
            match = _TOKEN_RE.match(text, index)
            if match is None or match.lastgroup is None:
                break
            if match.lastgroup == 'bad':
                raise ConceptSyntaxError(f"Unexpected character '{match.group('bad')}'",
                                         match.start('bad'), text)
            group = match.lastgroup
            tokens.append((match.group(group), match.start(group)))
            index = match.end()
        return tokens

    def _peek(self, offset: int = 0) -> Optional[str]:
        index = self.pos + offset
        return self.tokens[index][0] if index < len(self.tokens) else None

    def _position(self) -> int:
        if self.pos < len(self.tokens):
            return self.tokens[self.pos][1]
        return len(self.text)

    def _consume(self, expected: Optional[str] = None) -> str:
        token = self._peek()
        if token is None:
            raise ConceptSyntaxError("Unexpected end of input", len(self.text), self.text)
        if expected is not None and token != expected:
            raise ConceptSyntaxError(f"Expected '{expected}' but found '{token}'",
                                     self._position(), self.text)
        self.pos += 1
        return token

    def parse(self) -> Concept:
        if not self.tokens:
            raise ConceptSyntaxError("Empty concept expression", 0, self.text)
        concept = self.parse_disjunction()
        if self.pos < len(self.tokens):
            raise ConceptSyntaxError(f"Unexpected token '{self._peek()}'",
                                     self._position(), self.text)
        return concept

    def parse_disjunction(self) -> Concept:
        left = self.parse_conjunction()
        while self._peek() == 'or':
            self._consume('or')
            left = Or(left, self.parse_conjunction())
        return left

    def parse_conjunction(self) -> Concept:
        left = self.parse_unary()
        while self._peek() == 'and':
            self._consume('and')
            left = And(left, self.parse_unary())
        return left

    def parse_unary(self) -> Concept:
        token = self._peek()
        if token is None:
            raise ConceptSyntaxError("Unexpected end of input", len(self.text), self.text)
        if token == 'not':
            self._consume()
            return Not(self.parse_unary())
        if token == '(':
            self._consume('(')
            inner = self.parse_disjunction()
            self._consume(')')
            return inner
        if token == 'Top':
            self._consume()
            return TOP
        if token == 'Bottom':
            self._consume()
            return BOTTOM
        if token == ')' or token in KEYWORDS:
            raise ConceptSyntaxError(f"Unexpected token '{token}'", self._position(), self.text)

        name = self._consume()
        quantifier = self._peek()
        if quantifier == 'some':
            self._consume()
            return Exists(name, self.parse_unary())
        if quantifier == 'only':
            self._consume()
            return ForAll(name, self.parse_unary())
        return Atomic(name)


def parse(text: str) -> Concept:
    """Parse a Manchester-style concept expression into its syntax tree.

    The parser performs no rewriting: ``not not A`` stays a double negation.

    Raises:
        ConceptSyntaxError: on malformed input, carrying the character position.
    """
    return _Parser(text).parse()


# ---------------------------------------------------------------------------
# Rendering, canonical keys and length
# ---------------------------------------------------------------------------

@lru_cache(maxsize=65536)
def render(concept: Concept) -> str:
    """Render a concept fully parenthesized so that it parses back unchanged."""
    if isinstance(concept, Top):
        return 'Top'
    if isinstance(concept, Bottom):
        return 'Bottom'
    if isinstance(concept, Atomic):
        return concept.name
    if isinstance(concept, Not):
        return f"(not {render(concept.arg)})"
    if isinstance(concept, And):
        return f"({render(concept.left)} and {render(concept.right)})"
    if isinstance(concept, Or):
        return f"({render(concept.left)} or {render(concept.right)})"
    if isinstance(concept, Exists):
        return f"({concept.role} some {render(concept.filler)})"
    if isinstance(concept, ForAll):
        return f"({concept.role} only {render(concept.filler)})"
    raise TypeError(f"Not a concept: {concept!r}")


@lru_cache(maxsize=65536)
def canonical_form(concept: Concept) -> Concept:
    """Bottom-up normalization: drop double negations, sort And/Or operands.

    Operands are ordered by their rendered canonical forms. No other rewriting
    is applied.
    """
    if isinstance(concept, (Top, Bottom, Atomic)):
        return concept
    if isinstance(concept, Not):
        arg = canonical_form(concept.arg)
        if isinstance(arg, Not):
            return arg.arg
        return Not(arg)
    if isinstance(concept, (And, Or)):
        left = canonical_form(concept.left)
        right = canonical_form(concept.right)
        if render(right) < render(left):
            left, right = right, left
        return type(concept)(left, right)
    if isinstance(concept, (Exists, ForAll)):
        return type(concept)(concept.role, canonical_form(concept.filler))
    raise TypeError(f"Not a concept: {concept!r}")


def canonicalize(concept: Concept) -> CanonicalKey:
    """Cache key identifying a concept up to And/Or commutativity and ¬¬ elimination."""
    return render(canonical_form(concept)).encode('utf-8')


def textual_key(concept: Concept) -> CanonicalKey:
    """Cache key identifying a concept by its exact syntax (no normalization)."""
    return render(concept).encode('utf-8')


@lru_cache(maxsize=65536)
def length(concept: Concept) -> int:
    """Structural length: 1 per leaf and connective, 2 per role restriction."""
    if isinstance(concept, (Top, Bottom, Atomic)):
        return 1
    if isinstance(concept, Not):
        return 1 + length(concept.arg)
    if isinstance(concept, (And, Or)):
        return 1 + length(concept.left) + length(concept.right)
    if isinstance(concept, (Exists, ForAll)):
        return 2 + length(concept.filler)
    raise TypeError(f"Not a concept: {concept!r}")


def concept_names(concept: Concept) -> Tuple[frozenset, frozenset]:
    """Atomic concept names and role names occurring in ``concept``."""
    atoms = set()
    roles = set()
    stack = [concept]
    while stack:
        node = stack.pop()
        if isinstance(node, Atomic):
            atoms.add(node.name)
        elif isinstance(node, Not):
            stack.append(node.arg)
        elif isinstance(node, (And, Or)):
            stack.extend((node.left, node.right))
        elif isinstance(node, (Exists, ForAll)):
            roles.add(node.role)
            stack.append(node.filler)
    return frozenset(atoms), frozenset(roles)

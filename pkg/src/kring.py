"""
Exact Z₂-graded exterior algebra Λ(b₁, …, b_d) over the integers.

K*(T^d) ≅ Λ(SSH₁, …, SSH_d): b_i is the class of the SSH chain along the
i-th circle, b₁b₂ the class of the Chern insulator on T².
"""
import itertools
import logging
import re
from dataclasses import dataclass
from typing import Dict, List, Mapping, Tuple

from src.base import ProjectorFamily, UnitaryFamily
from src.errors import (ExpressionError, InvalidGridError, ParameterError,
                        ShapeMismatchError)
from src.invariants import InvariantReport, chern1_link, winding_number

logger = logging.getLogger(__name__)

Monomial = Tuple[int, ...]


@dataclass(frozen=True)
class ExteriorElement:
    """
    Integer combination of sorted generator monomials.

    Generators are 1-indexed; terms are kept sorted with zero coefficients
    removed, so equal elements compare equal.
    """
    d: int
    terms: Tuple[Tuple[Monomial, int], ...] = ()

    def __post_init__(self):
        if self.d < 0:
            raise ParameterError(f"generator count must be nonnegative, got {self.d}")
        for monomial, _ in self.terms:
            if list(monomial) != sorted(set(monomial)) or any(not 1 <= i <= self.d for i in monomial):
                raise ParameterError(f"monomial {monomial} is not a sorted subset of 1..{self.d}")

    @classmethod
    def from_dict(cls, d: int, coefficients: Mapping[Monomial, int]) -> "ExteriorElement":
        terms = tuple(sorted(((tuple(m), int(c)) for m, c in coefficients.items() if c != 0),
                             key=lambda term: (len(term[0]), term[0])))
        return cls(d, terms)

    @classmethod
    def scalar(cls, d: int, value: int) -> "ExteriorElement":
        return cls.from_dict(d, {(): value})

    @classmethod
    def generator(cls, d: int, i: int, coefficient: int = 1) -> "ExteriorElement":
        if not 1 <= i <= d:
            raise ParameterError(f"generator b{i} does not exist in Λ({d})")
        return cls.from_dict(d, {(i,): coefficient})

    @classmethod
    def basis(cls, d: int) -> List["ExteriorElement"]:
        """All 2^d monomials."""
        subsets = itertools.chain.from_iterable(
            itertools.combinations(range(1, d + 1), r) for r in range(d + 1))
        return [cls.from_dict(d, {s: 1}) for s in subsets]

    @property
    def coefficients(self) -> Dict[Monomial, int]:
        return dict(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def grades(self) -> set:
        return {len(m) % 2 for m, _ in self.terms}

    def is_odd(self) -> bool:
        return self.grades() == {1}

    def __add__(self, other):
        return ext_add(self, other)

    def __sub__(self, other):
        return ext_add(self, -other)

    def __neg__(self):
        return ExteriorElement(self.d, tuple((m, -c) for m, c in self.terms))

    def __mul__(self, other):
        return ext_mul(self, other)

    def __str__(self):
        return format_element(self)


def _same_d(a: ExteriorElement, b: ExteriorElement) -> None:
    if a.d != b.d:
        raise ShapeMismatchError(f"generator count mismatch: Λ({a.d}) vs Λ({b.d})")


def ext_add(a: ExteriorElement, b: ExteriorElement) -> ExteriorElement:
    _same_d(a, b)
    total = a.coefficients
    for monomial, c in b.terms:
        total[monomial] = total.get(monomial, 0) + c
    return ExteriorElement.from_dict(a.d, total)


def _merge(left: Monomial, right: Monomial):
    """Sorted concatenation and its permutation sign; None when an index repeats."""
    if set(left) & set(right):
        return None
    # each pair (i in left, j in right) with i > j is one transposition
    inversions = sum(1 for i in left for j in right if i > j)
    return tuple(sorted(left + right)), -1 if inversions % 2 else 1


def ext_mul(a: ExteriorElement, b: ExteriorElement) -> ExteriorElement:
    """Wedge product with the graded sign rule; b_i b_i = 0."""
    _same_d(a, b)
    total: Dict[Monomial, int] = {}
    for (m1, c1), (m2, c2) in itertools.product(a.terms, b.terms):
        merged = _merge(m1, m2)
        if merged is None:
            continue
        monomial, sign = merged
        total[monomial] = total.get(monomial, 0) + sign * c1 * c2
    return ExteriorElement.from_dict(a.d, total)


def relabel(a: ExteriorElement, d: int, offset: int = 0) -> ExteriorElement:
    """Embed a into Λ(d), shifting generator indices by offset."""
    if a.d + offset > d:
        raise ShapeMismatchError(f"cannot place Λ({a.d}) at offset {offset} inside Λ({d})")
    return ExteriorElement.from_dict(d, {tuple(i + offset for i in m): c for m, c in a.terms})


def kunneth(a: ExteriorElement, b: ExteriorElement) -> ExteriorElement:
    """External product Λ(d₁) ⊗ Λ(d₂) → Λ(d₁+d₂)."""
    d = a.d + b.d
    return ext_mul(relabel(a, d), relabel(b, d, offset=a.d))


# ------------------------------------------------------------- #
# Classification from computed invariants
# ------------------------------------------------------------- #

def classify_k1_circle(U: UnitaryFamily) -> Tuple[ExteriorElement, InvariantReport]:
    """w·b in Λ(1), w the winding number of U."""
    report = winding_number(U)
    return ExteriorElement.generator(1, 1, report.value), report


def classify_k0_torus2(P: ProjectorFamily) -> Tuple[int, ExteriorElement, InvariantReport]:
    """(rank, c·b₁b₂) with c the first Chern number of P over T²."""
    if P.grid.kind != "torus" or P.grid.ndim != 2:
        raise InvalidGridError(f"expected a 2-torus grid, got {P.grid.describe()}")
    report = chern1_link(P)
    return P.rank, ExteriorElement.from_dict(2, {(1, 2): report.value}), report


# ------------------------------------------------------------- #
# Expressions
# ------------------------------------------------------------- #

_TOKEN = re.compile(r"\s*(?:(\d+)|b(\d+)|([+\-*()]))")


def _tokenize(text: str) -> List[str]:
    tokens, position = [], 0
    text = text.rstrip()
    while position < len(text):
        match = _TOKEN.match(text, position)
        if not match:
            raise ExpressionError(f"unexpected character {text[position:].strip()[:1]!r} at {position}")
        number, generator, symbol = match.groups()
        if number is not None:
            tokens.append(("int", int(number)))
        elif generator is not None:
            tokens.append(("gen", int(generator)))
        else:
            tokens.append(("op", symbol))
        position = match.end()
    return tokens


class _Parser:
    """expr := term (("+"|"-") term)*; term := factor (["*"] factor)*; factor := "-" factor | atom."""

    def __init__(self, tokens, d: int):
        self.tokens = tokens
        self.position = 0
        self.d = d

    def peek(self):
        return self.tokens[self.position] if self.position < len(self.tokens) else (None, None)

    def take(self, symbol=None):
        token = self.peek()
        if token[0] is None or (symbol is not None and token != ("op", symbol)):
            raise ExpressionError(f"expected {symbol or 'a term'} at token {self.position}")
        self.position += 1
        return token

    def expression(self) -> ExteriorElement:
        value = self.term()
        while self.peek() in (("op", "+"), ("op", "-")):
            _, symbol = self.take()
            right = self.term()
            value = value + right if symbol == "+" else value - right
        return value

    def term(self) -> ExteriorElement:
        value = self.factor()
        while True:
            kind, payload = self.peek()
            if (kind, payload) == ("op", "*"):
                self.take("*")
            elif kind not in ("gen", "int") and (kind, payload) != ("op", "("):
                return value
            # juxtaposition multiplies: "2b1b2" reads as 2*b1*b2
            value = value * self.factor()

    def factor(self) -> ExteriorElement:
        kind, payload = self.peek()
        if (kind, payload) == ("op", "-"):
            self.take("-")
            return -self.factor()
        if (kind, payload) == ("op", "("):
            self.take("(")
            value = self.expression()
            self.take(")")
            return value
        if kind == "int":
            self.take()
            return ExteriorElement.scalar(self.d, payload)
        if kind == "gen":
            self.take()
            if not 1 <= payload <= self.d:
                raise ExpressionError(f"b{payload} is out of range for d = {self.d}")
            return ExteriorElement.generator(self.d, payload)
        raise ExpressionError(f"unexpected token {payload!r} at {self.position}")


def parse_element(text: str, d: int) -> ExteriorElement:
    """Parse integers, b<i>, +, -, * and parentheses into Λ(d)."""
    tokens = _tokenize(text)
    if not tokens:
        raise ExpressionError("empty expression")
    parser = _Parser(tokens, d)
    value = parser.expression()
    if parser.position != len(tokens):
        raise ExpressionError(f"trailing input at token {parser.position}")
    return value


def format_element(a: ExteriorElement) -> str:
    """Canonical form: monomials by degree then index, e.g. '1 + b1 + b2 + b1b2'."""
    if a.is_zero():
        return "0"
    parts = []
    for monomial, c in a.terms:
        name = "".join(f"b{i}" for i in monomial)
        magnitude = abs(c)
        body = str(magnitude) if not name else (name if magnitude == 1 else f"{magnitude}{name}")
        if not parts:
            parts.append(("-" if c < 0 else "") + body)
        else:
            parts.append(("- " if c < 0 else "+ ") + body)
    return " ".join(parts)


def evaluate(text: str, d: int) -> str:
    return format_element(parse_element(text, d))

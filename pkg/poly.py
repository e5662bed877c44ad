"""Sparse multivariate integer polynomials and polynomial equations

Polynomials are kept as a map from exponent vectors to non-zero integer
coefficients. Text input uses variables x1..xp, integer literals,
``+ - * ^`` and parentheses; equations contain exactly one ``=``.
"""

import logging
import math
import random
import re
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from errors import ArityError, EquationSyntaxError

logger = logging.getLogger(__name__)

Exponents = Tuple[int, ...]


class Polynomial:
    """Multivariate polynomial with arbitrary-precision integer coefficients"""

    __slots__ = ('terms', 'num_vars', '_hash')

    def __init__(self, terms: Optional[Dict[Exponents, int]] = None, num_vars: int = 1):
        if num_vars < 1:
            raise ValueError(f"num_vars must be positive, got {num_vars}")
        clean = {}
        for exps, coeff in (terms or {}).items():
            if len(exps) != num_vars:
                raise ArityError(num_vars, len(exps))
            if coeff:
                clean[tuple(exps)] = coeff
        self.terms = clean
        self.num_vars = num_vars
        self._hash = None

    # Constructors

    @classmethod
    def zero(cls, num_vars: int = 1) -> 'Polynomial':
        return cls({}, num_vars)

    @classmethod
    def constant(cls, c: int, num_vars: int = 1) -> 'Polynomial':
        return cls({(0,) * num_vars: c}, num_vars)

    @classmethod
    def variable(cls, i: int, num_vars: int) -> 'Polynomial':
        """The monomial x_i (1-based)"""
        if not 1 <= i <= num_vars:
            raise ValueError(f"Variable x{i} outside x1..x{num_vars}")
        exps = [0] * num_vars
        exps[i - 1] = 1
        return cls({tuple(exps): 1}, num_vars)

    # Structure

    def is_zero(self) -> bool:
        return not self.terms

    def degree(self, i: int) -> int:
        """Degree in x_i; 0 for the zero polynomial"""
        return max((e[i - 1] for e in self.terms), default=0)

    def degrees(self) -> List[int]:
        return [self.degree(i) for i in range(1, self.num_vars + 1)]

    def total_degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    def constant_term(self) -> int:
        return self.terms.get((0,) * self.num_vars, 0)

    def extend(self, num_vars: int) -> 'Polynomial':
        """Same polynomial viewed over more variables"""
        if num_vars < self.num_vars:
            raise ValueError(f"Cannot shrink {self.num_vars} variables to {num_vars}")
        pad = (0,) * (num_vars - self.num_vars)
        return Polynomial({e + pad: c for e, c in self.terms.items()}, num_vars)

    def _aligned(self, other: 'Polynomial'):
        n = max(self.num_vars, other.num_vars)
        a = self if self.num_vars == n else self.extend(n)
        b = other if other.num_vars == n else other.extend(n)
        return a, b, n

    # Arithmetic

    def __add__(self, other):
        if isinstance(other, int):
            other = Polynomial.constant(other, self.num_vars)
        if not isinstance(other, Polynomial):
            return NotImplemented
        a, b, n = self._aligned(other)
        terms = dict(a.terms)
        for e, c in b.terms.items():
            terms[e] = terms.get(e, 0) + c
        return Polynomial(terms, n)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial({e: -c for e, c in self.terms.items()}, self.num_vars)

    def __sub__(self, other):
        if isinstance(other, int):
            other = Polynomial.constant(other, self.num_vars)
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, int):
            return Polynomial({e: c * other for e, c in self.terms.items()}, self.num_vars)
        if not isinstance(other, Polynomial):
            return NotImplemented
        a, b, n = self._aligned(other)
        terms: Dict[Exponents, int] = {}
        for e1, c1 in a.terms.items():
            for e2, c2 in b.terms.items():
                e = tuple(x + y for x, y in zip(e1, e2))
                terms[e] = terms.get(e, 0) + c1 * c2
        return Polynomial(terms, n)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError(f"Exponent must be a non-negative integer, got {k!r}")
        result = Polynomial.constant(1, self.num_vars)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def __eq__(self, other):
        if isinstance(other, int):
            return self.terms == ({(0,) * self.num_vars: other} if other else {})
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.num_vars == other.num_vars and self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.num_vars, frozenset(self.terms.items())))
        return self._hash

    def __repr__(self):
        return f"Polynomial({to_text(self)!r}, num_vars={self.num_vars})"

    def __str__(self):
        return to_text(self)

    def evaluate(self, point: Sequence[int]) -> int:
        return evaluate(self, point)


@dataclass(frozen=True)
class PolyEquation:
    """lhs = rhs, with normalized = lhs - rhs"""
    lhs: Polynomial
    rhs: Polynomial
    normalized: Polynomial

    @classmethod
    def from_sides(cls, lhs: Polynomial, rhs: Polynomial) -> 'PolyEquation':
        n = max(lhs.num_vars, rhs.num_vars)
        lhs, rhs = lhs.extend(n), rhs.extend(n)
        return cls(lhs, rhs, lhs - rhs)

    @property
    def num_vars(self) -> int:
        return self.normalized.num_vars

    def check_normalized(self, samples: int = 16, seed: int = 0, radius: int = 1000) -> bool:
        """Spot-check normalized == lhs - rhs at random integer points"""
        rng = random.Random(seed)
        for _ in range(samples):
            point = [rng.randint(-radius, radius) for _ in range(self.num_vars)]
            if evaluate(self.normalized, point) != evaluate(self.lhs, point) - evaluate(self.rhs, point):
                return False
        return True

    def holds_at(self, point: Sequence[int]) -> bool:
        return evaluate(self.normalized, point) == 0

    def __str__(self):
        return f"{to_text(self.lhs)} = {to_text(self.rhs)}"


# Printing

def _grlex_key(exps: Exponents):
    return (sum(exps), exps)


def _monomial_text(exps: Exponents) -> str:
    parts = []
    for i, e in enumerate(exps, start=1):
        if e == 1:
            parts.append(f"x{i}")
        elif e > 1:
            parts.append(f"x{i}^{e}")
    return "*".join(parts)


def to_text(p: Polynomial) -> str:
    """Canonical text, terms in descending graded lexicographic order

    Example: x1^5 - x2^2 - x1 + x2
    """
    if p.is_zero():
        return "0"
    out = []
    for exps in sorted(p.terms, key=_grlex_key, reverse=True):
        coeff = p.terms[exps]
        mono = _monomial_text(exps)
        mag = abs(coeff)
        if not mono:
            body = str(mag)
        elif mag == 1:
            body = mono
        else:
            body = f"{mag}*{mono}"
        if not out:
            out.append(body if coeff > 0 else f"-{body}")
        else:
            out.append(f"+ {body}" if coeff > 0 else f"- {body}")
    return " ".join(out)


# Parsing

_TOKEN_RE = re.compile(r"\s*(?:(?P<num>\d+)|(?P<var>x\d+)|(?P<op>[-+*^()=])|(?P<bad>\S))")


def _tokenize(text: str, offset: int = 0) -> List[Tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            break  # trailing whitespace
        kind = m.lastgroup
        start = m.start(kind)
        if kind == 'bad':
            raise EquationSyntaxError(f"Unexpected character {m.group(kind)!r}", offset + start)
        tokens.append((kind, m.group(kind), offset + start))
        pos = m.end()
    return tokens


def _max_var_index(tokens) -> int:
    best = 0
    for kind, value, pos in tokens:
        if kind == 'var':
            idx = int(value[1:])
            if idx < 1:
                raise EquationSyntaxError("Variable indices start at x1", pos)
            best = max(best, idx)
    return best


class _Parser:
    """Recursive descent over + - * ^ with unary minus and parentheses"""

    def __init__(self, tokens, num_vars: int, end_pos: int):
        self.tokens = tokens
        self.i = 0
        self.num_vars = num_vars
        self.end_pos = end_pos

    def _peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def _pos(self) -> int:
        tok = self._peek()
        return tok[2] if tok else self.end_pos

    def _take_op(self, *ops) -> Optional[str]:
        tok = self._peek()
        if tok and tok[0] == 'op' and tok[1] in ops:
            self.i += 1
            return tok[1]
        return None

    def parse(self) -> Polynomial:
        if not self.tokens:
            raise EquationSyntaxError("Empty expression", self.end_pos)
        result = self._expr()
        if self._peek() is not None:
            raise EquationSyntaxError(f"Unexpected token {self._peek()[1]!r}", self._pos())
        return result

    def _expr(self) -> Polynomial:
        acc = self._term()
        while True:
            op = self._take_op('+', '-')
            if op is None:
                return acc
            rhs = self._term()
            acc = acc + rhs if op == '+' else acc - rhs

    def _term(self) -> Polynomial:
        acc = self._unary()
        while self._take_op('*'):
            acc = acc * self._unary()
        return acc

    def _unary(self) -> Polynomial:
        if self._take_op('-'):
            return -self._unary()
        if self._take_op('+'):
            return self._unary()
        return self._power()

    def _power(self) -> Polynomial:
        base = self._atom()
        if self._take_op('^'):
            tok = self._peek()
            if tok is None or tok[0] != 'num':
                raise EquationSyntaxError("Exponent must be a non-negative integer literal", self._pos())
            self.i += 1
            return base ** int(tok[1])
        return base

    def _atom(self) -> Polynomial:
        tok = self._peek()
        if tok is None:
            raise EquationSyntaxError("Unexpected end of input", self.end_pos)
        kind, value, pos = tok
        if kind == 'num':
            self.i += 1
            return Polynomial.constant(int(value), self.num_vars)
        if kind == 'var':
            self.i += 1
            return Polynomial.variable(int(value[1:]), self.num_vars)
        if kind == 'op' and value == '(':
            self.i += 1
            inner = self._expr()
            if not self._take_op(')'):
                raise EquationSyntaxError("Missing ')'", self._pos())
            return inner
        raise EquationSyntaxError(f"Unexpected token {value!r}", pos)


def parse_polynomial(text: str, num_vars: Optional[int] = None) -> Polynomial:
    """Parse a polynomial expression (no '=')"""
    tokens = _tokenize(text)
    for kind, value, pos in tokens:
        if kind == 'op' and value == '=':
            raise EquationSyntaxError("'=' not allowed in a polynomial", pos)
    p = max(num_vars or 0, _max_var_index(tokens), 1)
    return _Parser(tokens, p, len(text)).parse()


def parse_equation(text: str, num_vars: Optional[int] = None) -> PolyEquation:
    """Parse "lhs = rhs" into a PolyEquation over x1..xp

    p is the largest variable index mentioned (or num_vars if larger).

    Raises:
        EquationSyntaxError: bad token, bad exponent, or not exactly one '='
    """
    tokens = _tokenize(text)
    eq_positions = [i for i, (kind, value, _) in enumerate(tokens) if kind == 'op' and value == '=']
    if not eq_positions:
        raise EquationSyntaxError("Missing '='", len(text))
    if len(eq_positions) > 1:
        raise EquationSyntaxError("More than one '='", tokens[eq_positions[1]][2])

    p = max(num_vars or 0, _max_var_index(tokens), 1)
    split = eq_positions[0]
    eq_pos = tokens[split][2]
    lhs = _Parser(tokens[:split], p, eq_pos).parse()
    rhs = _Parser(tokens[split + 1:], p, len(text)).parse()
    equation = PolyEquation(lhs, rhs, lhs - rhs)
    logger.debug(f"🔍 Parsed equation over {p} variables: {equation.normalized}")
    return equation


# Evaluation and statistics

def evaluate(p: Polynomial, point: Sequence[int]) -> int:
    """Exact value of p at an integer point"""
    if len(point) != p.num_vars:
        raise ArityError(p.num_vars, len(point))
    total = 0
    for exps, coeff in p.terms.items():
        value = coeff
        for x, e in zip(point, exps):
            if e:
                value *= x ** e
        total += value
    return total


def coeff_stats(p: Polynomial) -> Tuple[int, List[int]]:
    """(M, [d_1..d_p]): largest |coefficient| and per-variable degrees"""
    m = max((abs(c) for c in p.terms.values()), default=0)
    return m, p.degrees()


def sum_of_squares(ps: Iterable[Polynomial]) -> Polynomial:
    """Sum of P_i^2; its integer zero set is the common zero set of the P_i

    Inputs over fewer variables are padded to the widest one.
    """
    ps = list(ps)
    if not ps:
        logger.warning("⚠ sum_of_squares called with no polynomials, returning 0")
        return Polynomial.zero(1)
    n = max(q.num_vars for q in ps)
    total = Polynomial.zero(n)
    for q in ps:
        q = q.extend(n)
        total = total + q * q
    return total


def integer_sqrt_test(n: int) -> Optional[int]:
    """r with r*r == n, or None when n is negative or not a square"""
    if n < 0:
        return None
    r = math.isqrt(n)
    return r if r * r == n else None


def max_abs_on_box(p: Polynomial, bound: int) -> int:
    """Upper bound on |p| over [-bound, bound]^num_vars: sum |c| * bound^deg"""
    return sum(abs(c) * bound ** sum(e) for e, c in p.terms.items())

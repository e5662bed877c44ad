"""Exact tower arithmetic for the double-exponential height bounds

Values such as 2^(2^(3^18-1)) cannot be written out, so they are kept as
expression trees over non-negative integers. A tree is evaluated exactly
when the result fits in ``materialize_bits`` bits; otherwise comparisons
go through mpmath logarithms, with an exact structural fallback when the
logarithms are too close to call.
"""

import logging
import math
import re
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Tuple, Union

from mpmath import mp, mpf
from sympy import perfect_power

from config import DEFAULTS
from errors import IncomparableError, InfeasibleError
from poly import Polynomial, PolyEquation, coeff_stats

logger = logging.getLogger(__name__)

# Past this log2 magnitude a logarithm is no longer computed
MAX_LOG_BITS = 1 << 40


class TowerExpr:
    """Base node of a tower expression tree"""

    prec = 4

    def value(self, cap_bits: Optional[int] = None, env: Optional[dict] = None) -> int:
        """Exact value, or InfeasibleError when wider than cap_bits"""
        cap = DEFAULTS.bounds.materialize_bits if cap_bits is None else cap_bits
        return self._value(cap, env or {})

    def try_value(self, cap_bits: Optional[int] = None, env: Optional[dict] = None) -> Optional[int]:
        try:
            return self.value(cap_bits, env)
        except InfeasibleError:
            return None

    def _value(self, cap: int, env: dict) -> int:
        raise NotImplementedError

    def log2(self, env: Optional[dict] = None) -> mpf:
        return self._log2(env or {})

    def _log2(self, env: dict) -> mpf:
        raise NotImplementedError

    def substitute(self, env: Dict[str, 'TowerExpr']) -> 'TowerExpr':
        return self

    def is_atom(self) -> bool:
        return self.prec == 4

    def to_string(self) -> str:
        raise NotImplementedError

    def __str__(self):
        return self.to_string()

    # Arithmetic sugar, kept symbolic

    def __add__(self, other):
        return Sum(self, as_expr(other))

    def __sub__(self, other):
        return Diff(self, as_expr(other))

    def __mul__(self, other):
        return Prod(self, as_expr(other))

    def __pow__(self, other):
        return Pow(self, as_expr(other))


def _check_bits(v: int, cap: int) -> int:
    if v.bit_length() > cap:
        raise InfeasibleError(f"Value needs {v.bit_length()} bits (cap {cap})")
    return v


def _log2_int(v: int) -> mpf:
    if v <= 0:
        return mpf('-inf')
    # bit_length keeps huge integers exact-ish without converting them
    shift = max(0, v.bit_length() - mp.prec - 8)
    return mp.log(mpf(v >> shift), 2) + shift


@dataclass(frozen=True)
class Lit(TowerExpr):
    v: int

    def __post_init__(self):
        if self.v < 0:
            raise ValueError(f"Tower literals are non-negative, got {self.v}")

    def _value(self, cap, env):
        return _check_bits(self.v, cap)

    def _log2(self, env):
        return _log2_int(self.v)

    def to_string(self):
        return str(self.v)


@dataclass(frozen=True)
class Sym(TowerExpr):
    """A named parameter (``n`` in bound descriptors)"""
    name: str = 'n'

    def _value(self, cap, env):
        if self.name not in env:
            raise InfeasibleError(f"Symbol {self.name!r} has no value")
        bound = env[self.name]
        if isinstance(bound, TowerExpr):
            return bound._value(cap, env)
        return _check_bits(bound, cap)

    def _log2(self, env):
        if self.name not in env:
            raise InfeasibleError(f"Symbol {self.name!r} has no value")
        bound = env[self.name]
        return bound._log2(env) if isinstance(bound, TowerExpr) else _log2_int(bound)

    def substitute(self, env):
        if self.name in env:
            return as_expr(env[self.name])
        return self

    def to_string(self):
        return self.name


@dataclass(frozen=True)
class _Binary(TowerExpr):
    a: TowerExpr
    b: TowerExpr

    op = '?'

    def _wrap(self, child: TowerExpr, right: bool) -> str:
        text = child.to_string()
        need = child.prec < self.prec or (right and child.prec == self.prec)
        return f"({text})" if need else text

    def to_string(self):
        return f"{self._wrap(self.a, False)}{self.op}{self._wrap(self.b, True)}"

    def substitute(self, env):
        return type(self)(self.a.substitute(env), self.b.substitute(env))


@dataclass(frozen=True)
class Sum(_Binary):
    op = '+'
    prec = 1

    def _value(self, cap, env):
        return _check_bits(self.a._value(cap, env) + self.b._value(cap, env), cap)

    def _log2(self, env):
        la, lb = self.a._log2(env), self.b._log2(env)
        hi, lo = max(la, lb), min(la, lb)
        if hi == mpf('-inf'):
            return hi
        return hi + mp.log(1 + mp.power(2, lo - hi), 2)


@dataclass(frozen=True)
class Diff(_Binary):
    op = '-'
    prec = 1

    def _value(self, cap, env):
        v = self.a._value(cap, env) - self.b._value(cap, env)
        if v < 0:
            raise ValueError(f"Negative difference in tower expression {self.to_string()}")
        return v

    def _log2(self, env):
        la, lb = self.a._log2(env), self.b._log2(env)
        if lb == mpf('-inf'):
            return la
        if lb >= la:
            return mpf('-inf')
        return la + mp.log(1 - mp.power(2, lb - la), 2)


@dataclass(frozen=True)
class Prod(_Binary):
    op = '*'
    prec = 2

    def _value(self, cap, env):
        x = self.a._value(cap, env)
        y = self.b._value(cap, env)
        if x.bit_length() + y.bit_length() - 1 > cap:
            raise InfeasibleError(f"Product too wide for {cap} bits")
        return _check_bits(x * y, cap)

    def _log2(self, env):
        return self.a._log2(env) + self.b._log2(env)


@dataclass(frozen=True)
class Pow(_Binary):
    op = '^'
    prec = 3

    def _wrap(self, child, right):
        text = child.to_string()
        return text if child.is_atom() else f"({text})"

    def _value(self, cap, env):
        base = self.a._value(cap, env)
        if base in (0, 1):
            try:
                e = self.b._value(cap, env)
            except InfeasibleError:
                return base  # any positive exponent
            return 1 if e == 0 else base
        e = self.b._value(cap, env)
        if e * (base.bit_length() - 1) > cap:
            raise InfeasibleError(f"Power {self.to_string()} exceeds {cap} bits")
        return _check_bits(base ** e, cap)

    def _log2(self, env):
        lb = self.a._log2(env)
        if lb == 0 or lb == mpf('-inf'):
            return lb
        le = self.b._log2(env)
        if le > MAX_LOG_BITS:
            raise InfeasibleError(f"Logarithm of {self.to_string()} is too large to represent")
        e = self.b.try_value(env=env)
        scale = mpf(e) if e is not None else mp.power(2, le)
        return scale * lb


def as_expr(x) -> TowerExpr:
    if isinstance(x, TowerExpr):
        return x
    if isinstance(x, TowerBound):
        return x.expr
    if isinstance(x, int) and not isinstance(x, bool):
        return Lit(x)
    raise TypeError(f"Cannot use {type(x).__name__} in a tower expression")


def fold(expr: TowerExpr, fold_bits: Optional[int] = None) -> TowerExpr:
    """Replace subtrees whose value has at most fold_bits bits by literals"""
    bits = DEFAULTS.bounds.fold_bits if fold_bits is None else fold_bits
    v = expr.try_value(cap_bits=bits)
    if v is not None:
        return Lit(v)
    if isinstance(expr, _Binary):
        return type(expr)(fold(expr.a, bits), fold(expr.b, bits))
    return expr


# Parsing

_TOWER_TOKEN = re.compile(r"\s*(?:(\d+)|([a-z]+)|([-+*^()]))")


def parse_tower(text: str) -> TowerExpr:
    """Parse a canonical tower string such as 2^(2^(3^18-1)); ^ is right-associative"""
    tokens = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TOWER_TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ValueError(f"Bad tower expression at position {pos}: {text!r}")
        if m.group(1):
            tokens.append(('num', int(m.group(1))))
        elif m.group(2):
            tokens.append(('sym', m.group(2)))
        else:
            tokens.append(('op', m.group(3)))
        pos = m.end()

    i = 0

    def peek():
        return tokens[i] if i < len(tokens) else (None, None)

    def take(op):
        nonlocal i
        if peek() == ('op', op):
            i += 1
            return True
        return False

    def expr():
        node = term()
        while True:
            if take('+'):
                node = Sum(node, term())
            elif take('-'):
                node = Diff(node, term())
            else:
                return node

    def term():
        node = power()
        while take('*'):
            node = Prod(node, power())
        return node

    def power():
        base = atom()
        if take('^'):
            return Pow(base, power())
        return base

    def atom():
        nonlocal i
        kind, val = peek()
        if kind == 'num':
            i += 1
            return Lit(val)
        if kind == 'sym':
            i += 1
            return Sym(val)
        if take('('):
            node = expr()
            if not take(')'):
                raise ValueError(f"Missing ')' in tower expression {text!r}")
            return node
        raise ValueError(f"Unexpected token {val!r} in tower expression {text!r}")

    result = expr()
    if i != len(tokens):
        raise ValueError(f"Trailing input in tower expression {text!r}")
    return result


# Comparison

def compare(a, b, precision_bits: Optional[int] = None) -> int:
    """Exact three-way comparison of two tower values (-1, 0 or 1)

    Raises:
        IncomparableError: the values are too close to separate by logs
            and no exact structural argument applies
    """
    a, b = as_expr(a), as_expr(b)
    va, vb = a.try_value(), b.try_value()
    if va is not None and vb is not None:
        return (va > vb) - (va < vb)
    if a == b:
        return 0

    # Same base (up to perfect powers): compare exponents
    if isinstance(a, Pow) and isinstance(b, Pow):
        ba, bb = a.a.try_value(), b.a.try_value()
        if ba is not None and bb is not None and ba > 1 and bb > 1:
            ea, eb = _power_offset(ba, a.b), _power_offset(bb, b.b)
            if ea[0] == eb[0]:
                return compare(ea[1], eb[1], precision_bits)

    prec = DEFAULTS.bounds.log_precision_bits if precision_bits is None else precision_bits
    with mp.workprec(prec):
        try:
            la, lb = a.log2(), b.log2()
        except InfeasibleError:
            raise IncomparableError(f"Cannot compare {a.to_string()} with {b.to_string()}")
        gap = abs(la - lb)
        scale = max(abs(la), abs(lb), mpf(1))
        if gap > scale * mp.power(2, -(prec // 2)):
            return 1 if la > lb else -1
    raise IncomparableError(f"{a.to_string()} and {b.to_string()} are too close to order")


def _power_offset(base: int, exponent: TowerExpr):
    """Rewrite base^e as root^(p*e) with root not a perfect power"""
    pp = perfect_power(base)
    if not pp:
        return base, exponent
    root, p = pp
    return root, fold(Prod(Lit(p), exponent))


class TowerBound:
    """The number 2^(2^k) for a tower expression k >= 0"""

    __slots__ = ('k',)

    def __init__(self, k):
        self.k = fold(as_expr(k))

    @property
    def expr(self) -> TowerExpr:
        return Pow(Lit(2), Pow(Lit(2), self.k))

    @property
    def exponent(self) -> TowerExpr:
        """e = 2^k, so the bound is 2^e"""
        return Pow(Lit(2), self.k)

    def value(self, cap_bits: Optional[int] = None) -> int:
        return self.expr.value(cap_bits)

    def try_value(self, cap_bits: Optional[int] = None) -> Optional[int]:
        return self.expr.try_value(cap_bits)

    def to_string(self) -> str:
        return self.expr.to_string()

    def to_jsonable(self) -> str:
        return self.to_string()

    def __str__(self):
        return self.to_string()

    def __repr__(self):
        return f"TowerBound({self.to_string()!r})"

    def __eq__(self, other):
        if isinstance(other, TowerBound):
            return self.k == other.k or compare(self.k, other.k) == 0
        return NotImplemented

    def __hash__(self):
        return hash(self.k)

    def _cmp(self, other) -> int:
        if isinstance(other, TowerBound):
            return compare(self.k, other.k)
        return compare(self.expr, other)

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0


def conjecture_bound(n: int) -> TowerBound:
    """2^(2^(n-1))"""
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    return TowerBound(Lit(n - 1))


def within(x: int, bound: TowerBound) -> bool:
    """|x| <= 2^(2^k), decided on bit lengths"""
    mag = abs(x)
    length = mag.bit_length()
    k = bound.k.try_value()
    if k is None or k > length.bit_length() + 1:
        return True
    e = 1 << k
    return length <= e or (length == e + 1 and mag == 1 << e)


def materialize(bound: TowerBound) -> Optional[int]:
    return bound.try_value()


# Bound pipelines

def _require_nonzero(d: Polynomial):
    if d.is_zero():
        raise ValueError("The zero polynomial has no height bound")


def _card_from_stats(m: int, degrees: List[int]) -> TowerExpr:
    # (d+1) factors grouped by value keep a wide exponent symbolic
    counts = Counter(deg + 1 for deg in degrees if deg)
    factors = [Pow(Lit(base), Lit(counts[base])) for base in sorted(counts)]
    exponent: TowerExpr = factors[0] if factors else Lit(1)
    for factor in factors[1:]:
        exponent = Prod(exponent, factor)
    return fold(Pow(Lit(2 * m + 1), exponent))


def card_T(d: Polynomial) -> TowerExpr:
    """(2M+1)^((d_1+1)...(d_p+1)), a literal when small"""
    _require_nonzero(d)
    m, degrees = coeff_stats(d)
    return _card_from_stats(m, degrees)


def bound_D(d: Polynomial) -> TowerBound:
    """2^(2^(card(T)-1))"""
    card = card_T(d)
    return TowerBound(Diff(card, Lit(1)))


def bound_nonneg(d: Polynomial) -> TowerBound:
    """Height bound for non-negative solutions via the four-square encoding"""
    from transforms import hat
    _require_nonzero(d)
    return bound_D(hat(d))


@dataclass
class RationalBoundReport:
    """Sizes met along the rational-solution pipeline"""
    lowered_vars: int
    integer_vars: int
    equation_count: int
    max_coefficient: int
    degrees: List[int]
    bound: TowerBound

    def to_jsonable(self) -> dict:
        return {
            "lowered_vars": self.lowered_vars,
            "integer_vars": self.integer_vars,
            "equations": self.equation_count,
            "max_coefficient": self.max_coefficient,
            "degree_product": math.prod(d + 1 for d in self.degrees),
            "bound": self.bound.to_string(),
        }


def _square_sum_stats(pieces, width: int) -> Tuple[int, List[int]]:
    """coeff_stats of the sum of squares of block-local polynomials

    Each square is taken over its own few variables and merged under
    sparse monomial keys, so the 12n-wide sum is never built.
    """
    total: Dict[Tuple[Tuple[int, int], ...], int] = {}
    for blocks, poly in pieces:
        for exps, coeff in (poly * poly).terms.items():
            key = tuple((12 * (blocks[pos // 12] - 1) + pos % 12, e) for pos, e in enumerate(exps) if e)
            total[key] = total.get(key, 0) + coeff
    m = 0
    degrees = [0] * width
    for key, coeff in total.items():
        if coeff == 0:
            continue
        m = max(m, abs(coeff))
        for var, e in key:
            degrees[var] = max(degrees[var], e)
    return m, degrees


def bound_rational(d: Union[Polynomial, PolyEquation], mul_form: str = 'verbatim') -> RationalBoundReport:
    """Conjectural height bound for rational solutions of D = 0

    Lowers D, rewrites every variable as y/z, folds the resulting
    equations into one sum of squares and applies bound_D to it.
    """
    from lower import lower_compact
    from transforms import rational_equations_local

    if isinstance(d, Polynomial):
        _require_nonzero(d)
        equation = PolyEquation.from_sides(d, Polynomial.zero(d.num_vars))
    else:
        equation = d
        _require_nonzero(equation.normalized)

    lowering = lower_compact(equation)
    system = lowering.target
    width = 12 * system.n
    pieces = [(blocks, eq.normalized) for blocks, eq in rational_equations_local(system, mul_form)]
    m, degrees = _square_sum_stats(pieces, width)
    logger.info(f"📐 Rational pipeline: n={system.n}, {width} integer variables, "
                f"{len(pieces)} equations")
    return RationalBoundReport(
        lowered_vars=system.n,
        integer_vars=width,
        equation_count=len(pieces),
        max_coefficient=m,
        degrees=degrees,
        bound=TowerBound(Diff(_card_from_stats(m, degrees), Lit(1))),
    )


def rational_height(q) -> int:
    """max(|numerator|, denominator) in lowest terms"""
    q = Fraction(q)
    return max(abs(q.numerator), q.denominator)


# Alternative bound functions

PSI_REGISTRY: Dict[str, Callable[[TowerExpr], object]] = {
    'default': lambda n: TowerBound(fold(Diff(n, Lit(1)))),
}


def general_psi_bound(n, psi='default'):
    """Evaluate a computable bound function at n

    psi may be a registry name, an expression in ``n`` such as
    "2^(2^n)", or a table {n: value}. n may be an int or a tower
    expression.
    """
    n_expr = as_expr(n)
    if isinstance(psi, dict):
        key = n_expr.try_value()
        table = {int(k): v for k, v in psi.items()}
        if key not in table:
            raise ValueError(f"Bound table has no entry for n={key}")
        return Lit(int(table[key]))
    if not isinstance(psi, str):
        raise ValueError(f"Unknown bound descriptor: {psi!r}")
    if psi in PSI_REGISTRY:
        return PSI_REGISTRY[psi](n_expr)
    try:
        template = parse_tower(psi)
    except ValueError:
        raise ValueError(f"Unknown bound descriptor: {psi!r}")
    return fold(template.substitute({'n': n_expr}))


def psi_bound_D(d: Polynomial, psi='default'):
    """psi applied to card(T) of D"""
    return general_psi_bound(card_T(d), psi)

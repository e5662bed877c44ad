"""Solution-set transforms and the witness finders they rely on

tilde removes x_i = 1 equations at the cost of admitting the zero tuple,
hat turns a polynomial into one whose integer zeros encode its
non-negative zeros, and rationalize restates a system over the rationals
as polynomial equations over integer numerator/denominator pairs.
"""

import itertools
import logging
import math
from fractions import Fraction
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from sympy import mod_inverse
from sympy.core.intfunc import igcdex
from sympy.ntheory.modular import crt
from sympy.solvers.diophantine.diophantine import sum_of_four_squares

from config import DEFAULTS
from ensys import EnEquation, EnSystem, solve
from errors import InfeasibleError, NotCoprimeError, WitnessSearchError
from poly import Polynomial, PolyEquation, evaluate, integer_sqrt_test, sum_of_squares

logger = logging.getLogger(__name__)

MUL_FORMS = ('verbatim', 'corrected')

# Per-variable block of rationalize: x_m = y/z plus ten auxiliaries
RATIONAL_BLOCK = ('y', 'z', 's', 't', 'u', 'v', 'p', 'q', 'a', 'b', 'c', 'd')

# Largest 5p-variable box hat_projection will scan
HAT_SCAN_CAP = 2_000_000


def tilde(system: EnSystem) -> EnSystem:
    """Replace each x_i = 1 by x_i * x_j = x_j for j = 1..n"""
    eqs: List[EnEquation] = []
    for eq in system.equations:
        if eq.kind != 'one':
            eqs.append(eq)
            continue
        i = eq.indices[0]
        eqs.extend(EnEquation.mul(i, j, j) for j in range(1, system.n + 1))
    return EnSystem(system.n, eqs)


# Non-negative zeros

def _spread(d: Polynomial, width: int) -> Polynomial:
    """Rename x_i to x_{5(i-1)+1} inside a polynomial over 5p variables"""
    terms = {}
    for exps, coeff in d.terms.items():
        new = [0] * width
        for i, e in enumerate(exps):
            new[5 * i] = e
        terms[tuple(new)] = coeff
    return Polynomial(terms, width)


def hat(d: Polynomial) -> Polynomial:
    """D^2 + sum_i (x_i - a_i^2 - b_i^2 - c_i^2 - d_i^2)^2 over 5p variables

    Variables are laid out per original index as (x_i, a_i, b_i, c_i, d_i).
    """
    p = d.num_vars
    width = 5 * p
    parts = [_spread(d, width)]
    for i in range(p):
        base = 5 * i
        x = Polynomial.variable(base + 1, width)
        squares = Polynomial.zero(width)
        for k in range(2, 6):
            v = Polynomial.variable(base + k, width)
            squares = squares + v * v
        parts.append(x - squares)
    return sum_of_squares(parts)


def hat_projection(d: Polynomial, bound: int) -> List[Tuple[int, ...]]:
    """Projections to x1..xp of the integer zeros of hat(D) in [-B, B]^(5p)

    Scans the whole 5p-variable box and evaluates hat(D) at every point,
    so the result is read off hat(D) alone. Boxes with more than
    HAT_SCAN_CAP points are refused.
    """
    p = d.num_vars
    width = 5 * p
    points = (2 * bound + 1) ** width
    if points > HAT_SCAN_CAP:
        raise InfeasibleError(f"hat box [-{bound}, {bound}]^{width} has {points} points, "
                              f"cap is {HAT_SCAN_CAP}")
    d_hat = hat(d)
    values = range(-bound, bound + 1)
    found = set()
    for point in itertools.product(values, repeat=width):
        if evaluate(d_hat, point) == 0:
            found.add(point[::5])
    return sorted(found)


# Rational encoding

def _block_vars(m: int, width: int) -> Dict[str, Polynomial]:
    base = 12 * (m - 1)
    return {name: Polynomial.variable(base + k, width) for k, name in enumerate(RATIONAL_BLOCK, start=1)}


def rational_equations_local(system: EnSystem, mul_form: str = 'verbatim'
                             ) -> Iterator[Tuple[Tuple[int, ...], PolyEquation]]:
    """The equations of rationalize, each over only the blocks it touches

    Yields (blocks, equation): the distinct E_n indices in ascending order
    and the equation over 12 variables per listed block, in that order.
    """
    if mul_form not in MUL_FORMS:
        raise ValueError(f"mul_form must be one of {MUL_FORMS}, got {mul_form!r}")

    for eq in system.equations:
        used = tuple(sorted(set(eq.indices)))
        width = 12 * len(used)
        local = {m: _block_vars(pos, width) for pos, m in enumerate(used, start=1)}
        if eq.kind == 'one':
            b = local[eq.indices[0]]
            yield used, PolyEquation.from_sides(b['y'], b['z'])
            continue
        bi, bj, bk = (local[i] for i in eq.indices)
        yi, zi = bi['y'], bi['z']
        yj, zj = bj['y'], bj['z']
        yk, zk = bk['y'], bk['z']
        if eq.kind == 'add':
            yield used, PolyEquation.from_sides(yi * zj * zk + yj * zi * zk, yk * zi * zj)
        elif mul_form == 'verbatim':
            yield used, PolyEquation.from_sides((yi * zj * zk) * (yj * zi * zk), yk * zi * zj)
        else:
            yield used, PolyEquation.from_sides(yi * yj * zk, yk * zi * zj)

    one = Polynomial.constant(1, 12)
    b = _block_vars(1, 12)
    aux = [
        PolyEquation.from_sides(
            one + b['s'] * b['s'] + b['t'] * b['t'] + b['u'] * b['u'] + b['v'] * b['v'], b['z']),
        PolyEquation.from_sides(b['p'] * b['y'] + b['q'] * b['z'], one),
        PolyEquation.from_sides(
            b['p'] * b['p'] + b['a'] * b['a'] + b['b'] * b['b'] + b['c'] * b['c'] + b['d'] * b['d'],
            b['z'] * b['z']),
    ]
    for m in range(1, system.n + 1):
        for equation in aux:
            yield (m,), equation


def _place_blocks(poly: Polynomial, blocks: Sequence[int], width: int) -> Polynomial:
    terms = {}
    for exps, coeff in poly.terms.items():
        placed = [0] * width
        for pos, m in enumerate(blocks):
            placed[12 * (m - 1):12 * m] = exps[12 * pos:12 * (pos + 1)]
        terms[tuple(placed)] = coeff
    return Polynomial(terms, width)


def rationalize(system: EnSystem, mul_form: str = 'verbatim') -> List[PolyEquation]:
    """Polynomial equations over 12n integers whose solutions encode rational solutions

    x_m = y_m / z_m. Auxiliary equations force z_m >= 1 and
    gcd(y_m, z_m) = 1 with a Bezout coefficient |p_m| <= z_m.

    Args:
        system: The E_n system
        mul_form: 'verbatim' keeps (y_i z_j z_k)(y_j z_i z_k) = y_k z_i z_j,
            'corrected' emits y_i y_j z_k = y_k z_i z_j
    """
    width = 12 * system.n
    return [
        PolyEquation.from_sides(_place_blocks(eq.lhs, blocks, width), _place_blocks(eq.rhs, blocks, width))
        for blocks, eq in rational_equations_local(system, mul_form)
    ]


def rational_witness(system: EnSystem, values: Sequence[Fraction],
                     mul_form: str = 'verbatim') -> Tuple[int, ...]:
    """Integer solution of rationalize(S) encoding a rational solution of S

    Raises:
        ValueError: values do not solve the rationalized equations
    """
    if len(values) != system.n:
        raise ValueError(f"Expected {system.n} values, got {len(values)}")
    point: List[int] = []
    for value in values:
        value = Fraction(value)
        y, z = value.numerator, value.denominator
        s, t, u, v = four_square(z - 1)
        p, q = bezout_bounded(y, z)
        a, b, c, d = four_square(z * z - p * p)
        point.extend((y, z, s, t, u, v, p, q, a, b, c, d))
    point = tuple(point)
    for eq in rationalize(system, mul_form):
        if not eq.holds_at(point):
            raise ValueError(f"{tuple(str(v) for v in values)} does not satisfy {eq} ({mul_form})")
    return point


def rational_solutions(system: EnSystem, bound: int, mul_form: str = 'verbatim',
                       node_budget: Optional[int] = None) -> List[Tuple[Fraction, ...]]:
    """Rationals y/z recovered from integer solutions of the lowered rationalize(S)

    Every (y_m, z_m) pair in [-B, B] is fixed in turn and the remaining
    variables are searched for one completion; the other originals stay
    in [-B, B], lowering auxiliaries get their meaning bounds.
    """
    from lower import lower_compact_system

    lowering = lower_compact_system(rationalize(system, mul_form))
    base = lowering.domains(bound)
    logger.info(f"🔍 Rational search: {lowering.n} lowered variables, B={bound}")

    found = set()
    values = range(-bound, bound + 1)
    for pairs in itertools.product(values, repeat=2 * system.n):
        doms = list(base)
        for m in range(system.n):
            y, z = pairs[2 * m], pairs[2 * m + 1]
            doms[12 * m] = (y, y)
            doms[12 * m + 1] = (z, z)
        result = solve(lowering.target, doms, first_only=True, node_budget=node_budget)
        if result.solutions:
            found.add(tuple(Fraction(pairs[2 * m], pairs[2 * m + 1]) for m in range(system.n)))
    return sorted(found)


# Witness finders

def four_square(m: int) -> Tuple[int, int, int, int]:
    """Lexicographically smallest non-negative (a, b, c, d) with a^2+b^2+c^2+d^2 = m

    Inputs above the configured limit fall back to sympy's decomposition,
    which is valid but not lexicographically minimal.
    """
    if m < 0:
        raise ValueError(f"Negative integers are not sums of four squares: {m}")
    if m > DEFAULTS.witnesses.four_square_limit:
        logger.debug(f"four_square({m}) above scan limit, using sympy")
        return tuple(sorted(sum_of_four_squares(m)))
    for a in range(math.isqrt(m) + 1):
        r1 = m - a * a
        for b in range(math.isqrt(r1) + 1):
            r2 = r1 - b * b
            for c in range(math.isqrt(r2) + 1):
                d = integer_sqrt_test(r2 - c * c)
                if d is not None:
                    return a, b, c, d
    raise WitnessSearchError(f"No four-square representation found for {m}")


def bezout_bounded(a: int, b: int) -> Tuple[int, int]:
    """(X, Y) with a*X + b*Y = 1 and |X| <= b

    X is the extended-Euclid coefficient when it is non-zero and already
    within [-b, b]; otherwise its representative in [1, b].

    Raises:
        ValueError: b is not positive
        NotCoprimeError: gcd(a, b) != 1
    """
    if b <= 0:
        raise ValueError(f"Second argument must be positive, got {b}")
    x, _, g = igcdex(a, b)
    x, g = int(x), int(g)
    if g != 1:
        raise NotCoprimeError(a, b, g)
    if x == 0 or abs(x) > b:
        x = (x - 1) % b + 1
    y = (1 - a * x) // b
    return x, y


def lemma6_witness(x: int, scan_limit: Optional[int] = None) -> Tuple[int, int]:
    """(a, b) with a*x = (2b - 1)(3b - 1), smallest b >= 1

    Raises:
        ValueError: x is zero
        WitnessSearchError: no b up to 6|x| + 1 works
    """
    if x == 0:
        raise ValueError("x must be non-zero")
    limit = DEFAULTS.witnesses.lemma6_scan_limit if scan_limit is None else scan_limit
    if abs(x) > limit:
        return _lemma6_crt(x)
    for b in range(1, 6 * abs(x) + 2):
        value = (2 * b - 1) * (3 * b - 1)
        if value % x == 0:
            return value // x, b
    raise WitnessSearchError(f"No b <= {6 * abs(x) + 1} with x={x} dividing (2b-1)(3b-1)")


def _lemma6_crt(x: int) -> Tuple[int, int]:
    """b = 1/3 modulo the 2-part of x and b = 1/2 modulo the rest"""
    m = abs(x)
    two_part = m & -m
    rest = m // two_part
    moduli, residues = [], []
    if two_part > 1:
        moduli.append(two_part)
        residues.append(int(mod_inverse(3, two_part)))
    if rest > 1:
        moduli.append(rest)
        residues.append(int(mod_inverse(2, rest)))
    b = int(crt(moduli, residues)[0]) if moduli else 1
    b = b % m or m
    value = (2 * b - 1) * (3 * b - 1)
    if value % x:
        raise WitnessSearchError(f"CRT construction failed for x={x}")
    return value // x, b

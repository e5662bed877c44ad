"""Pell equations X^2 - d*Y^2 = 1 and the square-witness lemmas built on them"""

import logging
from typing import Iterator, List, Optional, Sequence, Tuple

import pandas as pd
from sympy import continued_fraction_periodic

from poly import integer_sqrt_test

logger = logging.getLogger(__name__)


def _check_modulus(d: int):
    if d < 2:
        raise ValueError(f"Pell modulus must be at least 2, got {d}")
    if integer_sqrt_test(d) is not None:
        raise ValueError(f"Pell modulus {d} is a perfect square")


def pell_fundamental(d: int) -> Tuple[int, int]:
    """Smallest positive solution of X^2 - d*Y^2 = 1

    Walks the convergents of the continued fraction of sqrt(d); the
    solution appears at the end of the first or second period.
    """
    _check_modulus(d)
    a0, period = continued_fraction_periodic(0, 1, d)
    h_prev, h = 1, int(a0)
    k_prev, k = 0, 1
    if h * h - d * k * k == 1:
        return h, k
    for _ in range(2):
        for a in period:
            a = int(a)
            h_prev, h = h, a * h + h_prev
            k_prev, k = k, a * k + k_prev
            if h * h - d * k * k == 1:
                return h, k
    raise ArithmeticError(f"No Pell solution within two periods for d={d}")


def _mul(d: int, p: Tuple[int, int], q: Tuple[int, int]) -> Tuple[int, int]:
    """Product in Z[sqrt(d)]"""
    return p[0] * q[0] + d * p[1] * q[1], p[0] * q[1] + p[1] * q[0]


def pell_solutions(d: int, fundamental: Optional[Tuple[int, int]] = None) -> Iterator[Tuple[int, int]]:
    """All positive solutions in increasing order

    (X, Y) -> (X*X0 + d*Y*Y0, X*Y0 + Y*X0)
    """
    base = fundamental if fundamental is not None else pell_fundamental(d)
    current = base
    while True:
        yield current
        current = _mul(d, current, base)


def pell_kth(d: int, k: int, fundamental: Optional[Tuple[int, int]] = None) -> Tuple[int, int]:
    """k-th positive solution by binary powering"""
    if k < 1:
        raise ValueError(f"k must be positive, got {k}")
    base = fundamental if fundamental is not None else pell_fundamental(d)
    result = (1, 0)
    while k:
        if k & 1:
            result = _mul(d, result, base)
        base = _mul(d, base, base)
        k >>= 1
    return result


def lemma7_modulus(x: int) -> int:
    """d = x^3 (2 + x)"""
    if x < 2:
        raise ValueError(f"x must be at least 2, got {x}")
    d = x ** 3 * (2 + x)
    if integer_sqrt_test(d) is not None:
        logger.critical(f"❌ x^3(2+x) is a perfect square for x={x}")
        raise ValueError(f"x^3(2+x) = {d} is a perfect square")
    return d


def lemma7_fundamental(x: int) -> Tuple[int, int]:
    """Fundamental solution for d = x^3 (2 + x) without continued fractions

    d = x^2 ((x+1)^2 - 1), and the solutions of X^2 - ((x+1)^2 - 1) W^2 = 1
    are (T_k(x+1), U_{k-1}(x+1)) with U_{k-1}(x+1) = k (mod x), so the
    first one with x | W is k = x.
    """
    lemma7_modulus(x)
    a = x + 1
    big_x, w = pell_kth(a * a - 1, x, fundamental=(a, 1))
    return big_x, w // x


def lemma7_witnesses(x: int, count: int) -> List[int]:
    """The first ``count`` values y >= 1 with 1 + x^3(2+x)y^2 a square"""
    if count <= 0:
        return []
    d = lemma7_modulus(x)
    witnesses = []
    for _, y in pell_solutions(d, fundamental=lemma7_fundamental(x)):
        witnesses.append(y)
        if len(witnesses) == count:
            break
    return witnesses


def lemma8_check(x: int, y: int) -> bool:
    """y >= x + x^(x-2) for a witness y of x

    Raises:
        ValueError: 1 + x^3(2+x)y^2 is not a square
    """
    if x < 2 or y < 1:
        raise ValueError(f"Need x >= 2 and y >= 1, got x={x}, y={y}")
    if integer_sqrt_test(1 + x ** 3 * (2 + x) * y * y) is None:
        raise ValueError(f"y={y} is not a square witness for x={x}")
    holds = y >= x + x ** (x - 2)
    if not holds:
        logger.critical(f"❌ Square-witness lower bound refuted: x={x}, y={y} < x + x^(x-2)")
    return holds


def pell_table(xs: Sequence[int], count: int) -> pd.DataFrame:
    """One row per witness: x, d, k, y, X and the lower-bound check"""
    rows = []
    for x in xs:
        d = lemma7_modulus(x)
        bound = x + x ** (x - 2)
        solutions = pell_solutions(d, fundamental=lemma7_fundamental(x))
        for k in range(1, count + 1):
            big_x, y = next(solutions)
            rows.append({
                'x': x,
                'd': d,
                'k': k,
                'y': y,
                'X': big_x,
                'lower_bound': bound,
                'bound_holds': lemma8_check(x, y),
            })
    return pd.DataFrame(rows, columns=['x', 'd', 'k', 'y', 'X', 'lower_bound', 'bound_holds'])

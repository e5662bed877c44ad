"""Compile polynomial equations into E_n systems

Two lowerings are offered. ``lower_compact`` emits a three-address
program over an expression DAG and is what every pipeline uses.
``lower_canonical`` materializes the full family T of bounded polynomials
and every ring identity between its members; it is only feasible for tiny
inputs and exists to check the card(T) formula against a real system.
"""

import itertools
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

from bounds import card_T
from config import DEFAULTS
from ensys import EnEquation, EnSystem
from errors import InfeasibleError
from poly import (Polynomial, PolyEquation, coeff_stats, evaluate, max_abs_on_box,
                  parse_polynomial, to_text)

logger = logging.getLogger(__name__)


@dataclass
class LoweringMap:
    """Correspondence between a lowered system and its source

    Attributes:
        source: The equation (or equations) that was lowered
        target: The E_n system
        var_meaning: Polynomial over the original variables for every x_i
        num_original: p; x1..xp keep their meaning
        result_vars: Per source equation, the variable both sides meet in
        closing: Target equations that are not ring identities
    """
    source: Union[PolyEquation, List[PolyEquation], Polynomial]
    target: EnSystem
    var_meaning: Dict[int, Polynomial]
    num_original: int
    result_vars: List[Optional[int]] = field(default_factory=list)
    closing: List[EnEquation] = field(default_factory=list)

    @property
    def q(self) -> Optional[int]:
        return self.result_vars[0] if self.result_vars else None

    @property
    def n(self) -> int:
        return self.target.n

    def extend(self, point: Sequence[int]) -> Tuple[int, ...]:
        """Values of x1..xn determined by values of the original variables"""
        point = tuple(point)
        return tuple(evaluate(self.var_meaning[i], point) for i in range(1, self.n + 1))

    def project(self, solution: Sequence[int]) -> Tuple[int, ...]:
        return tuple(solution[:self.num_original])

    def meaning_bounds(self, bound: int) -> List[int]:
        """Largest |x_i| reachable when every original lies in [-B, B]"""
        return [max_abs_on_box(self.var_meaning[i], bound) for i in range(1, self.n + 1)]

    def domains(self, bound: int) -> List[Tuple[int, int]]:
        """Search intervals: [-B, B] for originals, meaning bounds for the rest"""
        doms = []
        for i, b in enumerate(self.meaning_bounds(bound), start=1):
            b = bound if i <= self.num_original else b
            doms.append((-b, b))
        return doms

    def to_json(self) -> dict:
        return {
            "meaning": {str(i): to_text(self.var_meaning[i]) for i in range(1, self.n + 1)},
            "q": self.q,
        }

    @classmethod
    def from_json(cls, data: dict, target: EnSystem, num_original: int,
                  source=None) -> 'LoweringMap':
        meaning = {int(i): parse_polynomial(text, num_original) for i, text in data["meaning"].items()}
        lowering = cls(source, target, meaning, num_original, [data.get("q")])
        lowering.closing = _closing_equations(target, meaning)
        return lowering


def _identity_holds(eq: EnEquation, meaning: Dict[int, Polynomial]) -> bool:
    if eq.kind == 'one':
        return meaning[eq.indices[0]] == 1
    i, j, k = eq.indices
    if eq.kind == 'add':
        return meaning[i] + meaning[j] == meaning[k]
    return meaning[i] * meaning[j] == meaning[k]


def _closing_equations(system: EnSystem, meaning: Dict[int, Polynomial]) -> List[EnEquation]:
    return [eq for eq in system.equations if not _identity_holds(eq, meaning)]


# Compact lowering

class _CompactBuilder:
    """Three-address code generation with hash-consing on meanings"""

    def __init__(self, p: int):
        self.p = p
        self.n = p
        self.equations: List[EnEquation] = []
        self.meaning: Dict[int, Polynomial] = {i: Polynomial.variable(i, p) for i in range(1, p + 1)}
        self.cache: Dict[Polynomial, int] = {poly: i for i, poly in self.meaning.items()}

    def _dest(self, poly: Polynomial, target: Optional[int]) -> int:
        if target is not None:
            return target
        self.n += 1
        self.meaning[self.n] = poly
        self.cache[poly] = self.n
        return self.n

    def _emit(self, kind: str, *indices: int):
        self.equations.append(EnEquation(kind, tuple(indices)))

    def value_of(self, poly: Polynomial) -> int:
        """Variable holding poly, built on first use"""
        if poly in self.cache:
            return self.cache[poly]
        return self._build(poly, None)

    def into(self, poly: Polynomial, target: int) -> int:
        """Emit code whose last equation writes poly into an existing variable"""
        return self._build(poly, target)

    def _const(self, c: int) -> Polynomial:
        return Polynomial.constant(c, self.p)

    def _build(self, poly: Polynomial, target: Optional[int]) -> int:
        p = self.p
        if poly.is_zero():
            dest = self._dest(poly, target)
            self._emit('add', dest, dest, dest)
            return dest

        positive = Polynomial({e: c for e, c in poly.terms.items() if c > 0}, p)
        negative = Polynomial({e: -c for e, c in poly.terms.items() if c < 0}, p)

        if not negative.is_zero():
            # poly = P - N  as  poly + N = P
            pv = self.value_of(positive)
            nv = self.value_of(negative)
            dest = self._dest(poly, target)
            self._emit('add', dest, nv, pv)
            return dest

        if len(poly.terms) > 1:
            # left fold in canonical term order
            ordered = sorted(poly.terms, key=lambda e: (sum(e), e), reverse=True)
            head = Polynomial({e: poly.terms[e] for e in ordered[:-1]}, p)
            last = Polynomial({ordered[-1]: poly.terms[ordered[-1]]}, p)
            hv = self.value_of(head)
            lv = self.value_of(last)
            dest = self._dest(poly, target)
            self._emit('add', hv, lv, dest)
            return dest

        (exps, coeff), = poly.terms.items()
        if sum(exps) == 0:
            return self._build_constant(coeff, target)

        if coeff > 1:
            cv = self.value_of(self._const(coeff))
            mv = self.value_of(Polynomial({exps: 1}, p))
            dest = self._dest(poly, target)
            self._emit('mul', cv, mv, dest)
            return dest

        used = [i for i, e in enumerate(exps) if e]
        if len(used) > 1:
            # product of variable powers in index order
            last = used[-1]
            head_exps = tuple(0 if i == last else e for i, e in enumerate(exps))
            tail_exps = tuple(e if i == last else 0 for i, e in enumerate(exps))
            hv = self.value_of(Polynomial({head_exps: 1}, p))
            tv = self.value_of(Polynomial({tail_exps: 1}, p))
            dest = self._dest(poly, target)
            self._emit('mul', hv, tv, dest)
            return dest

        var = used[0]
        e = exps[var]
        if e == 1:
            # a bare original variable written into a target
            if target is None:
                return var + 1
            zero = self.value_of(self._const(0))
            self._emit('add', var + 1, zero, target)
            return target

        # binary powering: low bits first, squarings shared
        top = 1 << (e.bit_length() - 1)
        low = e - top
        if low == 0:
            half = self.value_of(self._power(var, top // 2))
            dest = self._dest(poly, target)
            self._emit('mul', half, half, dest)
            return dest
        lv = self.value_of(self._power(var, low))
        hv = self.value_of(self._power(var, top))
        dest = self._dest(poly, target)
        self._emit('mul', lv, hv, dest)
        return dest

    def _power(self, var: int, e: int) -> Polynomial:
        exps = [0] * self.p
        exps[var] = e
        return Polynomial({tuple(exps): 1}, self.p)

    def _build_constant(self, c: int, target: Optional[int]) -> int:
        """Addition chain from the one-variable: double, then add one

        Walks the bits of c from the top, so the chain is as long as c
        has bits and never recurses. Only the last step writes into target.
        """
        if c == 1:
            dest = self._dest(self._const(1), target)
            self._emit('one', dest)
            return dest
        one = self.value_of(self._const(1))
        steps = []
        value = 1
        for bit in bin(c)[3:]:
            steps.append((2 * value, False))
            value *= 2
            if bit == '1':
                steps.append((value + 1, True))
                value += 1
        current = one
        for pos, (value, plus_one) in enumerate(steps):
            last = pos == len(steps) - 1
            poly = self._const(value)
            if poly in self.cache and not (last and target is not None):
                current = self.cache[poly]
                continue
            right = one if plus_one else current
            dest = self._dest(poly, target if last else None)
            self._emit('add', current, right, dest)
            current = dest
        return current

    def lower_equation(self, eq: PolyEquation) -> Optional[int]:
        """Lower one equation; returns the variable both sides meet in"""
        if eq.normalized.is_zero():
            return None
        holder, other = eq.lhs.extend(self.p), eq.rhs.extend(self.p)
        if _is_atom(other) and not _is_atom(holder):
            holder, other = other, holder
        elif _is_constant(holder) and not _is_constant(other):
            holder, other = other, holder
        h = self.value_of(holder)
        self.into(other, h)
        return h


def _is_atom(poly: Polynomial) -> bool:
    if len(poly.terms) != 1:
        return False
    (exps, coeff), = poly.terms.items()
    return coeff == 1 and sum(exps) == 1


def _is_constant(poly: Polynomial) -> bool:
    return all(sum(e) == 0 for e in poly.terms)


def lower_compact_system(equations: Sequence[PolyEquation]) -> LoweringMap:
    """Lower several equations over one shared DAG"""
    equations = list(equations)
    p = max((eq.num_vars for eq in equations), default=1)
    builder = _CompactBuilder(p)
    results = [builder.lower_equation(eq) for eq in equations]
    system = EnSystem(builder.n, builder.equations)
    lowering = LoweringMap(
        source=equations,
        target=system,
        var_meaning=dict(builder.meaning),
        num_original=p,
        result_vars=results,
    )
    lowering.closing = _closing_equations(system, lowering.var_meaning)
    logger.debug(f"🔧 Lowered {len(equations)} equations: n={system.n}, {len(system)} E_n equations")
    return lowering


def lower_compact(eq: PolyEquation) -> LoweringMap:
    """Three-address lowering of one equation

    Powers use repeated squaring, constants an addition chain from a
    one-variable, differences a - b = c become c + b = a, and the two
    sides meet in a shared variable.
    """
    lowering = lower_compact_system([eq])
    lowering.source = eq
    return lowering


# Canonical lowering over the full family T

def lower_canonical(d: Polynomial, cap: Optional[int] = None) -> LoweringMap:
    """Lowering over every polynomial with coefficients in [-M, M] and deg_i <= d_i

    Each member of T gets a variable (x_i keeps index i when x_i is in T),
    every identity x_i = 1, x_i + x_j = x_k, x_i * x_j = x_k inside T is
    emitted, and x_q + x_q = x_q closes the system for q assigned to D.
    A variable with d_i = 0 is not a member of T and stays unconstrained.

    Raises:
        InfeasibleError: card(T) is above the cap
    """
    cap = DEFAULTS.lowering.canonical_cap if cap is None else cap
    card = card_T(d)
    size = card.try_value()
    if size is None or size > cap:
        raise InfeasibleError(f"card(T) = {card.to_string()} exceeds the canonical lowering cap {cap}")

    p = d.num_vars
    m, degrees = coeff_stats(d)
    slots = list(itertools.product(*(range(deg + 1) for deg in degrees)))
    logger.info(f"🔧 Canonical lowering: card(T) = {size}, {len(slots)} monomial slots")

    index: Dict[Polynomial, int] = {}
    meaning: Dict[int, Polynomial] = {i: Polynomial.variable(i, p) for i in range(1, p + 1)}
    for i in range(1, p + 1):
        if degrees[i - 1] >= 1:
            index[meaning[i]] = i
    next_var = p
    members: List[Polynomial] = []
    for coeffs in itertools.product(range(-m, m + 1), repeat=len(slots)):
        poly = Polynomial(dict(zip(slots, coeffs)), p)
        members.append(poly)
        if poly not in index:
            next_var += 1
            index[poly] = next_var
            meaning[next_var] = poly

    eqs: List[EnEquation] = []
    one = Polynomial.constant(1, p)
    if one in index:
        eqs.append(EnEquation.one(index[one]))
    for a_pos, a in enumerate(members):
        ia = index[a]
        for b in members[a_pos:]:
            ib = index[b]
            s = a + b
            if s in index:
                eqs.append(EnEquation.add(ia, ib, index[s]))
            prod = a * b
            if prod in index:
                eqs.append(EnEquation.mul(ia, ib, index[prod]))

    q = index[d]
    closing = EnEquation.add(q, q, q)
    eqs.append(closing)
    system = EnSystem(next_var, eqs)
    logger.info(f"   ✓ {system.n} variables, {len(system)} equations")
    return LoweringMap(
        source=PolyEquation.from_sides(d, Polynomial.zero(p)),
        target=system,
        var_meaning=meaning,
        num_original=p,
        result_vars=[q],
        closing=[closing],
    )


# Gadgets

@dataclass
class Fragment:
    """Equations over a block of fresh variables"""
    equations: List[EnEquation]
    output: int
    fresh: List[int]

    @property
    def next_free(self) -> int:
        return max(self.fresh, default=self.output) + 1


def gadget_value_chain(n: int, first_free: int = 1, output: Optional[int] = None) -> Fragment:
    """Force a variable to equal n: t1 = 1, t_k = t_{k-1} + t1, out = t_{n-1} + t1

    Without an output index the last chain variable is a fresh one.
    """
    if n < 1:
        raise ValueError(f"Chain value must be positive, got {n}")
    fresh: List[int] = []
    nxt = first_free

    def new_var():
        nonlocal nxt
        fresh.append(nxt)
        nxt += 1
        return fresh[-1]

    if n == 1:
        t1 = output if output is not None else new_var()
        return Fragment([EnEquation.one(t1)], t1, fresh)

    t1 = new_var()
    eqs = [EnEquation.one(t1)]
    prev = t1
    for _ in range(2, n):
        cur = new_var()
        eqs.append(EnEquation.add(prev, t1, cur))
        prev = cur
    out = output if output is not None else new_var()
    eqs.append(EnEquation.add(prev, t1, out))
    return Fragment(eqs, out, fresh)


def gadget_nonneg(target: int, first_free: int) -> Fragment:
    """target = u + v, u = a + b, v = c + d, a..d squares of four fresh variables

    Ten fresh variables; together with the target the block spans eleven.
    """
    u, v, a, b, c, d, alpha, beta, gamma, delta = range(first_free, first_free + 10)
    eqs = [
        EnEquation.add(u, v, target),
        EnEquation.add(a, b, u),
        EnEquation.add(c, d, v),
        EnEquation.mul(alpha, alpha, a),
        EnEquation.mul(beta, beta, b),
        EnEquation.mul(gamma, gamma, c),
        EnEquation.mul(delta, delta, d),
    ]
    return Fragment(eqs, target, list(range(first_free, first_free + 10)))


def assemble_finite_fold_system(n: int, m: int, delta: Optional[EnSystem] = None) -> EnSystem:
    """Value chain forcing x1 = n, the equations of delta, and x_i >= 0 for i = 2..m

    Variables: x1..xm, then n-1 chain variables, then 10 per gadget,
    n + 11(m-1) in total.
    """
    if m < 1:
        raise ValueError(f"m must be positive, got {m}")
    if delta is not None and delta.n > m:
        raise ValueError(f"delta uses {delta.n} variables but m={m}")
    eqs: List[EnEquation] = list(delta.equations) if delta is not None else []
    chain = gadget_value_chain(n, first_free=m + 1, output=1)
    eqs.extend(chain.equations)
    free = m + 1 + len(chain.fresh)
    for i in range(2, m + 1):
        block = gadget_nonneg(i, free)
        eqs.extend(block.equations)
        free = block.next_free
    total = free - 1
    system = EnSystem(total, eqs)
    logger.debug(f"🔧 Assembled finite-fold system: n={n}, m={m}, {total} variables")
    return system

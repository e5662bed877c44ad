"""Explicit E_n constructions and the worked quintic example

Every builder returns a plain EnSystem; witnesses are assembled with
exact integers so even the full-scale constructions can be checked
equation by equation.
"""

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from sympy import integer_nthroot
from tqdm import tqdm

from bounds import TowerBound, conjecture_bound, within
from ensys import EnEquation, EnSystem, check_solution, save_system
from lower import LoweringMap, assemble_finite_fold_system, lower_compact
from pell import lemma7_fundamental, lemma7_modulus, pell_kth
from poly import integer_sqrt_test, parse_equation
from transforms import lemma6_witness
from utils import dumps

logger = logging.getLogger(__name__)

WORKED_EQUATION = "x1^5 - x1 = x2^2 - x2"
# x2^2 - x2 >= -1/4 forces x1^5 - x1 > -1, i.e. x1 > -2
WORKED_X1_FLOOR = -2
SCAN_CHUNK = 1024


def build_chain(n: int) -> EnSystem:
    """x1 + x1 = x2, x1 * x1 = x2, x_i * x_i = x_{i+1} up to x_n

    Solutions: all zeros, and (2, 4, 16, ..., 2^(2^(n-1))).
    """
    if n < 2:
        raise ValueError(f"Chain needs n >= 2, got {n}")
    eqs = [EnEquation.add(1, 1, 2), EnEquation.mul(1, 1, 2)]
    eqs.extend(EnEquation.mul(i, i, i + 1) for i in range(2, n))
    return EnSystem(n, eqs)


def build_thm7(n: int) -> EnSystem:
    """A system with exactly 1156 * 2^(n-10) integer solutions

    x1..x6 force x6 = 2^16, x7*x8 = x6 and x9*x10 = x6 each have 34
    signed divisor pairs, and x_i * x_i = x_i pads with two values each.
    """
    if n < 10:
        raise ValueError(f"Construction needs n >= 10, got {n}")
    eqs = [EnEquation.one(1), EnEquation.add(1, 1, 2)]
    eqs.extend(EnEquation.mul(i, i, i + 1) for i in range(2, 6))
    eqs.append(EnEquation.mul(7, 8, 6))
    eqs.append(EnEquation.mul(9, 10, 6))
    eqs.extend(EnEquation.mul(i, i, i) for i in range(11, n + 1))
    return EnSystem(n, eqs)


# Infinitely many solutions, none small

THM8_VARS = 21


def thm8_parameters(depth: int) -> Dict[str, int]:
    """Base b = 2^(2^depth) and Pell modulus d = b^3 (2 + b)"""
    if depth not in (2, 3, 4):
        raise ValueError(f"Squaring depth must be 2, 3 or 4, got {depth}")
    b = 1 << (1 << depth)
    return {"depth": depth, "base": b, "modulus": b ** 3 * (2 + b)}


def build_thm8(depth: int = 4) -> EnSystem:
    """19 equations over 21 variables

    x1..x15 encode x15^2 = 1 + b^3 (2 + b) x11^2 with b held in x6;
    x16..x21 encode x21 * x11^2 = (2 x16 - 1)(3 x16 - 1). Depth 4 gives
    b = 2^16; below that, squarings past the depth become x_i * x1 = x_{i+1}.
    """
    thm8_parameters(depth)
    eqs = [EnEquation.one(1), EnEquation.add(1, 1, 2)]
    for i in range(2, 6):
        if i - 1 <= depth:
            eqs.append(EnEquation.mul(i, i, i + 1))
        else:
            eqs.append(EnEquation.mul(i, 1, i + 1))
    eqs += [
        EnEquation.mul(6, 6, 7),
        EnEquation.mul(6, 7, 8),
        EnEquation.add(2, 6, 9),
        EnEquation.mul(8, 9, 10),
        EnEquation.mul(11, 11, 12),
        EnEquation.mul(10, 12, 13),
        EnEquation.add(1, 13, 14),
        EnEquation.mul(15, 15, 14),
        EnEquation.add(16, 16, 17),
        EnEquation.add(1, 18, 17),
        EnEquation.add(16, 18, 19),
        EnEquation.mul(18, 19, 20),
        EnEquation.mul(12, 21, 20),
    ]
    return EnSystem(THM8_VARS, eqs)


def assemble_thm8_witness(depth: int = 4, k: int = 1) -> Tuple[int, ...]:
    """Full solution from the k-th Pell solution and a divisibility witness"""
    params = thm8_parameters(depth)
    b, d = params["base"], params["modulus"]
    big_x, y = pell_kth(d, k, fundamental=lemma7_fundamental(b))
    logger.debug(f"Pell witness for b={b}: x11 has {y.bit_length()} bits")

    x = [0] * (THM8_VARS + 1)
    x[1] = 1
    x[2] = 2
    for i in range(2, 6):
        x[i + 1] = x[i] * x[i] if i - 1 <= depth else x[i]
    x[7] = x[6] * x[6]
    x[8] = x[6] * x[7]
    x[9] = x[2] + x[6]
    x[10] = x[8] * x[9]
    x[11] = y
    x[12] = y * y
    x[13] = x[10] * x[12]
    x[14] = 1 + x[13]
    x[15] = big_x
    a, b16 = lemma6_witness(x[12])
    x[16] = b16
    x[17] = 2 * b16
    x[18] = x[17] - 1
    x[19] = x[16] + x[18]
    x[20] = x[18] * x[19]
    x[21] = a
    return tuple(x[1:])


@dataclass
class Thm8Chain:
    """Lower-bound chain for the smallest assembled witness"""
    depth: int
    base: int
    modulus: int
    x11_bits: int
    lower_bound_holds: bool
    x12_exceeds_square_bound: bool
    exceeds_conjecture_bound: bool
    solution_checks: bool

    def to_jsonable(self) -> dict:
        return dict(self.__dict__)


def thm8_lemma8_chain(depth: int = 4) -> Thm8Chain:
    """|x11| >= b + b^(b-2) and |x12| = x11^2 > (b^(b-2))^2 on the assembled witness"""
    params = thm8_parameters(depth)
    b = params["base"]
    witness = assemble_thm8_witness(depth)
    x11, x12 = abs(witness[10]), abs(witness[11])
    inner = b ** (b - 2)
    return Thm8Chain(
        depth=depth,
        base=b,
        modulus=params["modulus"],
        x11_bits=x11.bit_length(),
        lower_bound_holds=x11 >= b + inner,
        x12_exceeds_square_bound=x12 > inner * inner,
        exceeds_conjecture_bound=not within(x12, conjecture_bound(THM8_VARS)),
        solution_checks=check_solution(build_thm8(depth), witness),
    )


# Worked example: x1^5 - x1 = x2^2 - x2

@dataclass
class WorkedExample:
    equation: str
    n: int
    bound: TowerBound
    x1_floor: int
    x1_ceiling: int
    solutions: List[Tuple[int, int]] = field(default_factory=list)
    lowering: Optional[LoweringMap] = None

    def to_jsonable(self) -> dict:
        return {
            "equation": self.equation,
            "n": self.n,
            "bound": self.bound.to_string(),
            "scan": [self.x1_floor, self.x1_ceiling],
            "solutions": [list(s) for s in self.solutions],
        }

    def to_text(self) -> str:
        lines = [
            f"Equation: {self.equation}",
            f"Lowered to E_{self.n}; conjectural bound {self.bound.to_string()}",
            f"Scan: {self.x1_floor} < x1 <= {self.x1_ceiling}",
            f"Integer solutions ({len(self.solutions)}):",
        ]
        lines.extend(f"  {s}" for s in self.solutions)
        return "\n".join(lines) + "\n"


def _scan_chunk(bounds: Tuple[int, int]) -> List[Tuple[int, int]]:
    """Solutions with x1 in [lo, hi): 4 x1^5 - 4 x1 + 1 must be an odd square"""
    lo, hi = bounds
    found = []
    for x1 in range(lo, hi):
        r = integer_sqrt_test(4 * x1 ** 5 - 4 * x1 + 1)
        if r is None:
            continue
        for x2 in sorted({(1 - r) // 2, (1 + r) // 2}):
            found.append((x1, x2))
    return found


def worked_example(workers: int = 1, progress: bool = False) -> WorkedExample:
    """Lower the quintic, take the E_7 bound on x5 = x1^5, scan x1, verify"""
    eq = parse_equation(WORKED_EQUATION)
    lowering = lower_compact(eq)
    n = lowering.n
    bound = conjecture_bound(n)
    x5_limit = bound.value()
    ceiling = int(integer_nthroot(x5_limit, 5)[0])
    logger.info(f"🔍 Worked example: n={n}, |x1^5| <= {bound}, scanning {WORKED_X1_FLOOR} < x1 <= {ceiling}")

    chunks = [(lo, min(lo + SCAN_CHUNK, ceiling + 1))
              for lo in range(WORKED_X1_FLOOR + 1, ceiling + 1, SCAN_CHUNK)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            parts = list(tqdm(executor.map(_scan_chunk, chunks), total=len(chunks),
                              desc="Scanning x1", disable=not progress))
    else:
        parts = [_scan_chunk(c) for c in tqdm(chunks, desc="Scanning x1", disable=not progress)]
    solutions = sorted(s for part in parts for s in part)

    for s in solutions:
        if not check_solution(lowering.target, lowering.extend(s)):
            raise AssertionError(f"Lowered system rejects solution {s}")
    logger.info(f"✅ {len(solutions)} integer solutions verified on the lowered system")
    return WorkedExample(WORKED_EQUATION, n, bound, WORKED_X1_FLOOR, ceiling, solutions, lowering)


# Finite-fold assembly and fixtures

def gadget_demo(n: int, m: int) -> dict:
    """Assemble the finite-fold system and report its size"""
    system = assemble_finite_fold_system(n, m)
    return {
        "n": n,
        "m": m,
        "variables": system.n,
        "expected_variables": n + 11 * (m - 1),
        "equations": len(system),
    }


FIXTURES = {
    "chain_n4.json": lambda: build_chain(4),
    "thm7_n10.json": lambda: build_thm7(10),
    "thm8_depth2.json": lambda: build_thm8(2),
    "thm8_depth4.json": lambda: build_thm8(4),
}


def write_fixtures(directory: str = "fixtures") -> List[str]:
    """Regenerate the shipped system files; existing files are overwritten"""
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name, builder in FIXTURES.items():
        written.append(save_system(builder(), str(out / name)))
    lowering = lower_compact(parse_equation(WORKED_EQUATION))
    written.append(save_system(lowering.target, str(out / "worked_example.json")))
    map_path = out / "worked_example_map.json"
    map_path.write_text(dumps(lowering.to_json()), encoding="utf-8")
    written.append(str(map_path))
    logger.info(f"💾 Wrote {len(written)} fixture files to {out}")
    return written

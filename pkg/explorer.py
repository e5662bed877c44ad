"""Empirical probes of the 2^(2^(n-1)) size bound

probe tests one tuple against the bound's reformulation, survey
classifies whole families of small systems, and semi_algorithm_infinite
runs the shell-by-shell search that halts exactly when an equation has
infinitely many integer solutions.
"""

import itertools
import json
import logging
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple

import pandas as pd
from tqdm import tqdm

from bounds import bound_D, bound_nonneg, conjecture_bound, within
from config import DEFAULTS
from ensys import (EnSystem, all_equations, canonical_form, enumerate_box, find_in_annulus,
                   induced_system)
from errors import SearchBudgetExhausted
from poly import Polynomial, evaluate
from utils import auto_rename_output, to_jsonable

logger = logging.getLogger(__name__)

VACUOUS = 'Vacuous'
WITNESS_FOUND = 'WitnessFound'
EXHAUSTED = 'Exhausted'

FINITE_WITHIN_BOUND = 'FiniteWithinBound'
GROWING_FAMILY = 'GrowingFamily'
SOLUTION_BEYOND_BOUND = 'SolutionBeyondBound'
UNKNOWN = 'Unknown'

MAX_SURVEY_N = 3


def _norm(x: Sequence[int]) -> int:
    return max((abs(v) for v in x), default=0)


@dataclass
class Verdict:
    kind: str
    witness: Optional[Tuple[int, ...]]
    horizon: int
    relations: int = 0

    def to_jsonable(self) -> dict:
        return {
            "kind": self.kind,
            "witness": list(self.witness) if self.witness is not None else None,
            "horizon": self.horizon,
            "relations": self.relations,
        }


def probe(x: Sequence[int], horizon: int, strict: bool = False,
          node_budget: Optional[int] = None) -> Verdict:
    """Look for y satisfying every Add/Mul relation of x with a coordinate beyond |x1|

    Lax mode accepts any |y_i| > |x1|, strict mode only |y1| > |x1|.
    Tuples with |x1| within 2^(2^(n-1)) are vacuous.

    Raises:
        ValueError: horizon does not exceed max |x_i|
    """
    x = tuple(x)
    if not x:
        raise ValueError("Tuple must be non-empty")
    n = len(x)
    if within(x[0], conjecture_bound(n)):
        return Verdict(VACUOUS, None, horizon)
    if horizon <= _norm(x):
        raise ValueError(f"Horizon {horizon} must exceed max |x_i| = {_norm(x)}")

    induced = induced_system(x)
    relations = EnSystem(n, (eq for eq in induced.equations if eq.kind != 'one'))
    low = abs(x[0])
    coords = [1] if strict else range(1, n + 1)
    logger.debug(f"🔍 Probing {x} with {len(relations)} relations up to {horizon}")
    try:
        y = find_in_annulus(relations, low, horizon, coordinates=coords, node_budget=node_budget)
    except SearchBudgetExhausted:
        return Verdict(EXHAUSTED, None, horizon, len(relations))

    if y is None:
        return Verdict(EXHAUSTED, None, horizon, len(relations))
    checks = all(eq.holds(y) for eq in relations.equations)
    beyond = abs(y[0]) > low if strict else _norm(y) > low
    if not (checks and beyond):
        raise AssertionError(f"Search returned an invalid witness {y} for {x}")
    return Verdict(WITNESS_FOUND, y, horizon, len(relations))


# Classification of small systems

@dataclass
class Classification:
    system: EnSystem
    status: str
    max_norm_seen: int
    evidence: dict = field(default_factory=dict)

    def to_jsonable(self) -> dict:
        return {
            "system": self.system.to_json(),
            "status": self.status,
            "max_norm": self.max_norm_seen,
            "evidence": to_jsonable(self.evidence),
        }

    @classmethod
    def from_json(cls, data: dict) -> 'Classification':
        evidence = dict(data.get("evidence", {}))
        for key in ("beyond_witness", "outer_witness"):
            if evidence.get(key) is not None:
                evidence[key] = tuple(int(v) for v in evidence[key])
        return cls(EnSystem.from_json(data["system"]), data["status"], int(data["max_norm"]), evidence)


def classify(system: EnSystem, bound: Optional[int] = None, growth_box: Optional[int] = None,
             node_budget: Optional[int] = None) -> Classification:
    """Status of one system from its solutions inside the bound and two existence searches

    FiniteWithinBound: nothing with norm in (b, B_growth].
    GrowingFamily: a solution with norm in (B_growth // 2, B_growth].
    SolutionBeyondBound: something beyond b, nothing in the outer half.
    Unknown: the node budget ran out.
    """
    b = conjecture_bound(system.n).value() if bound is None else bound
    growth = DEFAULTS.survey.growth_box if growth_box is None else growth_box
    budget = DEFAULTS.search.node_budget if node_budget is None else node_budget
    inner = enumerate_box(system, b)
    inner_max = max((_norm(s) for s in inner.solutions), default=0)
    evidence = {
        "bound": b,
        "growth_box": growth,
        "count_within_bound": inner.count,
        "beyond_witness": None,
        "outer_witness": None,
    }
    try:
        beyond = find_in_annulus(system, b, growth, node_budget=budget)
        evidence["beyond_witness"] = beyond
        if beyond is None:
            return Classification(system, FINITE_WITHIN_BOUND, inner_max, evidence)
        outer = find_in_annulus(system, growth // 2, growth, node_budget=budget)
        evidence["outer_witness"] = outer
    except SearchBudgetExhausted as e:
        logger.warning(f"⚠ Node budget exhausted after {e.nodes} nodes on {system.to_canonical_json()}")
        return Classification(system, UNKNOWN, inner_max, evidence)

    if outer is not None:
        return Classification(system, GROWING_FAMILY, max(inner_max, _norm(outer)), evidence)
    logger.warning(f"⚠ Candidate beyond the bound: {system.to_canonical_json()} at {beyond}")
    return Classification(system, SOLUTION_BEYOND_BOUND, max(inner_max, _norm(beyond)), evidence)


def _classify_payload(payload) -> Classification:
    system, growth_box, node_budget = payload
    return classify(system, growth_box=growth_box, node_budget=node_budget)


def _canonical_systems(systems: Iterable[EnSystem]) -> List[EnSystem]:
    seen = {}
    for system in systems:
        canon, _ = canonical_form(system)
        seen.setdefault(canon.sort_keys(), canon)
    return [seen[key] for key in sorted(seen)]


def survey_systems(n: int, seed: Optional[int] = None, samples: Optional[int] = None,
                   density: Optional[float] = None) -> List[EnSystem]:
    """Canonical systems to classify: every subset of E_n for n <= 2, a seeded sample for n = 3"""
    if not 1 <= n <= MAX_SURVEY_N:
        raise ValueError(f"Survey supports 1 <= n <= {MAX_SURVEY_N}, got {n}")
    eqs = all_equations(n)
    if n <= 2:
        subsets = itertools.chain.from_iterable(
            itertools.combinations(eqs, r) for r in range(len(eqs) + 1))
        return _canonical_systems(EnSystem(n, s) for s in subsets)

    cfg = DEFAULTS.survey
    rng = random.Random(cfg.seed if seed is None else seed)
    samples = cfg.n3_samples if samples is None else samples
    density = cfg.n3_density if density is None else density
    drawn = [EnSystem(n, [eq for eq in eqs if rng.random() < density]) for _ in range(samples)]
    return _canonical_systems(drawn)


def survey(n: int, growth_box: Optional[int] = None, seed: Optional[int] = None,
           samples: Optional[int] = None, density: Optional[float] = None,
           workers: int = 1, node_budget: Optional[int] = None,
           progress: bool = False) -> List[Classification]:
    """Classify canonical systems over n variables, in canonical order"""
    systems = survey_systems(n, seed, samples, density)
    growth = DEFAULTS.survey.growth_box if growth_box is None else growth_box
    logger.info(f"📋 Surveying {len(systems)} canonical systems over {n} variables (growth box {growth})")
    payloads = [(s, growth, node_budget) for s in systems]
    if workers > 1 and len(payloads) > 1:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            results = list(tqdm(executor.map(_classify_payload, payloads, chunksize=16),
                                total=len(payloads), desc="Classifying", disable=not progress))
    else:
        results = [_classify_payload(p) for p in tqdm(payloads, desc="Classifying", disable=not progress)]

    statuses = pd.Series([c.status for c in results], dtype=object).value_counts()
    for status, count in statuses.items():
        logger.info(f"   {status}: {count}")
    return results


def write_jsonl(classifications: Iterable[Classification], path: str) -> str:
    """One compact JSON document per line; returns the path written"""
    path = auto_rename_output(path)
    with open(path, 'w', encoding='utf-8') as f:
        for c in classifications:
            f.write(json.dumps(c.to_jsonable(), sort_keys=True, separators=(',', ':')) + "\n")
    logger.info(f"💾 Survey written: {path}")
    return path


def read_jsonl(path: str) -> List[Classification]:
    lines = Path(path).read_text(encoding='utf-8').splitlines()
    return [Classification.from_json(json.loads(line)) for line in lines if line.strip()]


def survey_table(classifications: Iterable[Classification]) -> pd.DataFrame:
    rows = [{
        'system': "; ".join(str(eq) for eq in c.system.equations) or "(empty)",
        'n': c.system.n,
        'equations': len(c.system),
        'status': c.status,
        'max_norm': c.max_norm_seen,
        'count_within_bound': c.evidence.get('count_within_bound'),
        'beyond_witness': c.evidence.get('beyond_witness'),
        'outer_witness': c.evidence.get('outer_witness'),
    } for c in classifications]
    return pd.DataFrame(rows, columns=['system', 'n', 'equations', 'status', 'max_norm',
                                       'count_within_bound', 'beyond_witness', 'outer_witness'])


# Shell search for infinitely many solutions

@dataclass
class SemiReport:
    status: str                    # 'terminated', 'exhausted' or 'refused'
    start: str
    cutoff: int
    shell: Optional[int] = None
    witness: Optional[Tuple[int, ...]] = None
    solutions: List[Tuple[int, ...]] = field(default_factory=list)
    nonneg: bool = False

    def to_jsonable(self) -> dict:
        return {
            "status": self.status,
            "start": self.start,
            "cutoff": self.cutoff,
            "shell": self.shell,
            "witness": list(self.witness) if self.witness is not None else None,
            "solutions": [list(s) for s in self.solutions],
            "nonneg": self.nonneg,
        }


def _shell(p: int, alpha: int, nonneg: bool):
    """Points with max |y_i| = alpha, coordinates ordered 0, 1, -1, 2, -2, ..."""
    if nonneg:
        values = list(range(alpha + 1))
    else:
        values = [0] + [v for k in range(1, alpha + 1) for v in (k, -k)]
    for point in itertools.product(values, repeat=p):
        if _norm(point) == alpha:
            yield point


def semi_algorithm_infinite(d: Polynomial, alpha_start_override: Optional[int] = None,
                            alpha_cutoff: int = 100, nonneg: bool = False) -> SemiReport:
    """Search shells alpha = bound + 1, bound + 2, ... for a zero of D

    The integer variant starts past bound_D(D), the non-negative variant
    past bound_nonneg(D). The start is refused when it does not
    materialize or lies past the cutoff; an override replaces it.
    """
    if alpha_start_override is not None:
        start = alpha_start_override
        start_text = str(start)
    else:
        bound = bound_nonneg(d) if nonneg else bound_D(d)
        start_text = f"{bound.to_string()}+1"
        value = bound.try_value()
        if value is None or value + 1 > alpha_cutoff:
            logger.warning(f"⚠ Shell search would start at {start_text}; refusing without an override")
            return SemiReport('refused', start_text, alpha_cutoff, nonneg=nonneg)
        start = value + 1
    if alpha_cutoff < start:
        raise ValueError(f"Cutoff {alpha_cutoff} is below the start {start}")

    p = d.num_vars
    for alpha in range(start, alpha_cutoff + 1):
        hits = [y for y in _shell(p, alpha, nonneg) if evaluate(d, y) == 0]
        if hits:
            logger.info(f"✅ Zero found on shell {alpha}: {hits[0]}")
            return SemiReport('terminated', start_text, alpha_cutoff, alpha, hits[0], sorted(hits), nonneg)
    logger.info(f"ℹ No zero on shells {start}..{alpha_cutoff}")
    return SemiReport('exhausted', start_text, alpha_cutoff, nonneg=nonneg)

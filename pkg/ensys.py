"""E_n constraint systems and a bounded propagation solver

A system is a set of equations of the three shapes x_i = 1,
x_i + x_j = x_k and x_i * x_j = x_k over variables x1..xn. The solver
keeps a closed integer interval per variable, narrows the intervals to a
fixpoint, and branches on the variable with the fewest candidate values.
"""

import itertools
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from sympy import divisors

from errors import ArityError, InfeasibleError, SearchBudgetExhausted

logger = logging.getLogger(__name__)

KIND_RANK = {'one': 0, 'add': 1, 'mul': 2}

# Max number of shards the top branching level is cut into
MAX_SHARDS = 64
# Products wider than this are not factored for divisor branching
DIVISOR_BITS = 96
# Interval revisions allowed per propagation pass
REVISION_CAP = 200_000
# Largest n canonical_form will permute
CANONICAL_MAX_N = 8


@dataclass(frozen=True)
class EnEquation:
    """One equation of E_n; Add and Mul are stored with i <= j"""
    kind: str
    indices: Tuple[int, ...]

    def __post_init__(self):
        if self.kind not in KIND_RANK:
            raise ValueError(f"Unknown equation kind: {self.kind!r}")
        expected = 1 if self.kind == 'one' else 3
        if len(self.indices) != expected:
            raise ValueError(f"'{self.kind}' takes {expected} indices, got {len(self.indices)}")
        if any(not isinstance(i, int) or isinstance(i, bool) or i < 1 for i in self.indices):
            raise ValueError(f"Indices must be positive integers: {self.indices}")
        if self.kind != 'one':
            i, j, k = self.indices
            if i > j:
                object.__setattr__(self, 'indices', (j, i, k))
        else:
            object.__setattr__(self, 'indices', tuple(self.indices))

    @classmethod
    def one(cls, i: int) -> 'EnEquation':
        return cls('one', (i,))

    @classmethod
    def add(cls, i: int, j: int, k: int) -> 'EnEquation':
        return cls('add', (i, j, k))

    @classmethod
    def mul(cls, i: int, j: int, k: int) -> 'EnEquation':
        return cls('mul', (i, j, k))

    def sort_key(self):
        return (KIND_RANK[self.kind], self.indices)

    def variables(self) -> Tuple[int, ...]:
        return tuple(sorted(set(self.indices)))

    def holds(self, x: Sequence[int]) -> bool:
        """Check against a 0-based tuple of values"""
        if self.kind == 'one':
            return x[self.indices[0] - 1] == 1
        i, j, k = self.indices
        if self.kind == 'add':
            return x[i - 1] + x[j - 1] == x[k - 1]
        return x[i - 1] * x[j - 1] == x[k - 1]

    def renamed(self, perm: Sequence[int]) -> 'EnEquation':
        """Apply perm[old-1] = new to every index"""
        return EnEquation(self.kind, tuple(perm[i - 1] for i in self.indices))

    def to_json(self) -> list:
        return [self.kind, *self.indices]

    def __str__(self):
        if self.kind == 'one':
            return f"x{self.indices[0]} = 1"
        i, j, k = self.indices
        op = '+' if self.kind == 'add' else '*'
        return f"x{i} {op} x{j} = x{k}"


class EnSystem:
    """A duplicate-free, sorted set of E_n equations"""

    __slots__ = ('n', 'equations')

    def __init__(self, n: int, equations: Iterable[EnEquation] = ()):
        if not isinstance(n, int) or n < 1:
            raise ValueError(f"n must be a positive integer, got {n!r}")
        eqs = set(equations)
        for eq in eqs:
            if max(eq.indices) > n:
                raise ValueError(f"Equation {eq} uses an index above n={n}")
        self.n = n
        self.equations = tuple(sorted(eqs, key=EnEquation.sort_key))

    def __len__(self):
        return len(self.equations)

    def __iter__(self):
        return iter(self.equations)

    def __eq__(self, other):
        if not isinstance(other, EnSystem):
            return NotImplemented
        return self.n == other.n and self.equations == other.equations

    def __hash__(self):
        return hash((self.n, self.equations))

    def __repr__(self):
        return f"EnSystem(n={self.n}, equations=[{', '.join(str(e) for e in self.equations)}])"

    def with_equations(self, extra: Iterable[EnEquation], n: Optional[int] = None) -> 'EnSystem':
        return EnSystem(n or self.n, list(self.equations) + list(extra))

    def sort_keys(self) -> tuple:
        return tuple(eq.sort_key() for eq in self.equations)

    def to_json(self) -> dict:
        return {"n": self.n, "eqs": [eq.to_json() for eq in self.equations]}

    def to_canonical_json(self) -> str:
        return json.dumps(self.to_json())

    @classmethod
    def from_json(cls, data: dict) -> 'EnSystem':
        """Build from {"n": int, "eqs": [["one", i] | ["add", i, j, k] | ["mul", i, j, k]]}"""
        if not isinstance(data, dict) or 'n' not in data:
            raise ValueError("System JSON must be an object with an 'n' field")
        eqs = []
        for entry in data.get('eqs', []):
            if not isinstance(entry, list) or not entry:
                raise ValueError(f"Malformed equation entry: {entry!r}")
            eqs.append(EnEquation(entry[0], tuple(entry[1:])))
        return cls(data['n'], eqs)


def load_system(path: str) -> EnSystem:
    with open(path, 'r', encoding='utf-8') as f:
        return EnSystem.from_json(json.load(f))


def save_system(system: EnSystem, path: str) -> str:
    Path(path).write_text(system.to_canonical_json() + "\n", encoding='utf-8')
    return path


def all_equations(n: int) -> List[EnEquation]:
    """Every equation of E_n in canonical order"""
    eqs = [EnEquation.one(i) for i in range(1, n + 1)]
    for kind in ('add', 'mul'):
        for i in range(1, n + 1):
            for j in range(i, n + 1):
                for k in range(1, n + 1):
                    eqs.append(EnEquation(kind, (i, j, k)))
    return eqs


@dataclass
class SolutionSet:
    """Solutions of a system inside the box [-B, B]^n"""
    n: int
    box_radius: int
    solutions: List[Tuple[int, ...]]
    truncated: bool = False
    count: Optional[int] = None

    def to_jsonable(self) -> dict:
        return {
            "n": self.n,
            "box": self.box_radius,
            "count": self.count,
            "truncated": self.truncated,
            "solutions": [list(s) for s in self.solutions],
        }


@dataclass
class SolveResult:
    solutions: List[Tuple[int, ...]] = field(default_factory=list)
    count: int = 0
    truncated: bool = False
    nodes: int = 0


def check_solution(system: EnSystem, x: Sequence[int]) -> bool:
    """True iff every equation of the system holds at x"""
    if len(x) != system.n:
        raise ArityError(system.n, len(x))
    return all(eq.holds(x) for eq in system.equations)


# Interval arithmetic helpers

def _ceil_div(a: int, b: int) -> int:
    return -((-a) // b)


def _ceil_sqrt(n: int) -> int:
    r = math.isqrt(n)
    return r if r * r == n else r + 1


def _int_roots(a: int, b: int, c: int) -> Optional[List[int]]:
    """Integer roots of a*u^2 + b*u + c; None when every u is a root"""
    if a == 0:
        if b == 0:
            return None if c == 0 else []
        return [-c // b] if c % b == 0 else []
    disc = b * b - 4 * a * c
    if disc < 0:
        return []
    r = math.isqrt(disc)
    if r * r != disc:
        return []
    roots = set()
    for s in (r, -r):
        num = -b + s
        if num % (2 * a) == 0:
            roots.add(num // (2 * a))
    return sorted(roots)


@lru_cache(maxsize=4096)
def _positive_divisors(m: int) -> Tuple[int, ...]:
    return tuple(divisors(m))


def _size(cands) -> int:
    # len() overflows on ranges wider than a machine word
    if isinstance(cands, range):
        return max(0, cands.stop - cands.start)
    return len(cands)


class _Conflict(Exception):
    pass


class EnSolver:
    """Branch-and-propagate search over per-variable closed intervals

    Branching picks the variable with the fewest candidates: integer roots
    of a single-unknown equation, signed divisor pairs of a pinned product,
    or the plain interval. Ties go to the variable in more equations, then
    to the lower index.
    """

    def __init__(self, system: EnSystem, node_budget: Optional[int] = None):
        self.system = system
        self.n = system.n
        self.node_budget = node_budget
        self.nodes = 0
        self.watch: List[List[EnEquation]] = [[] for _ in range(self.n + 1)]
        for eq in system.equations:
            for v in eq.variables():
                self.watch[v].append(eq)
        self.membership = [len(w) for w in self.watch]

    # Propagation

    def propagate(self, lo: List[int], hi: List[int], queue: Optional[Iterable[EnEquation]] = None) -> bool:
        """Narrow lo/hi in place to a fixpoint; False on conflict"""
        self.nodes += 1
        if self.node_budget is not None and self.nodes > self.node_budget:
            raise SearchBudgetExhausted(self.nodes)

        pending = list(self.system.equations if queue is None else queue)
        queued = set(pending)
        revisions = 0
        try:
            while pending and revisions < REVISION_CAP:
                eq = pending.pop()
                queued.discard(eq)
                revisions += 1
                for v in self._revise(eq, lo, hi):
                    for other in self.watch[v]:
                        if other not in queued:
                            queued.add(other)
                            pending.append(other)
        except _Conflict:
            return False
        return True

    @staticmethod
    def _narrow(v, new_lo, new_hi, lo, hi, changed):
        a = max(lo[v], new_lo)
        b = min(hi[v], new_hi)
        if a > b:
            raise _Conflict()
        if a != lo[v] or b != hi[v]:
            lo[v], hi[v] = a, b
            changed.append(v)

    def _revise(self, eq: EnEquation, lo, hi) -> List[int]:
        changed: List[int] = []
        narrow = self._narrow

        if eq.kind == 'one':
            narrow(eq.indices[0], 1, 1, lo, hi, changed)
            return changed

        i, j, k = eq.indices
        if eq.kind == 'add':
            if i == j == k:
                narrow(i, 0, 0, lo, hi, changed)
            elif i == j:
                narrow(k, 2 * lo[i], 2 * hi[i], lo, hi, changed)
                narrow(i, _ceil_div(lo[k], 2), hi[k] // 2, lo, hi, changed)
            elif k == i:
                narrow(j, 0, 0, lo, hi, changed)
            elif k == j:
                narrow(i, 0, 0, lo, hi, changed)
            else:
                narrow(k, lo[i] + lo[j], hi[i] + hi[j], lo, hi, changed)
                narrow(i, lo[k] - hi[j], hi[k] - lo[j], lo, hi, changed)
                narrow(j, lo[k] - hi[i], hi[k] - lo[i], lo, hi, changed)
        else:
            if i == j:
                a, b = lo[i], hi[i]
                sq = (a * a, b * b)
                if a <= 0 <= b:
                    narrow(k, 0, max(sq), lo, hi, changed)
                else:
                    narrow(k, min(sq), max(sq), lo, hi, changed)
                if hi[k] < 0:
                    raise _Conflict()
                r = math.isqrt(hi[k])
                narrow(i, -r, r, lo, hi, changed)
                if lo[k] > 0:
                    s = _ceil_sqrt(lo[k])
                    if lo[i] > -s:
                        narrow(i, s, hi[i], lo, hi, changed)
                    if hi[i] < s:
                        narrow(i, lo[i], -s, lo, hi, changed)
            else:
                if (lo[i] == hi[i] == 0) or (lo[j] == hi[j] == 0):
                    narrow(k, 0, 0, lo, hi, changed)
                corners = [lo[i] * lo[j], lo[i] * hi[j], hi[i] * lo[j], hi[i] * hi[j]]
                narrow(k, min(corners), max(corners), lo, hi, changed)
                if lo[k] > 0 or hi[k] < 0:
                    for v in (i, j):
                        if lo[v] == 0:
                            narrow(v, 1, hi[v], lo, hi, changed)
                        if hi[v] == 0:
                            narrow(v, lo[v], -1, lo, hi, changed)
                for v, w in ((i, j), (j, i)):
                    if lo[w] > 0 or hi[w] < 0:
                        pairs = [(kk, ww) for kk in (lo[k], hi[k]) for ww in (lo[w], hi[w])]
                        narrow(v,
                               min(_ceil_div(kk, ww) for kk, ww in pairs),
                               max(kk // ww for kk, ww in pairs),
                               lo, hi, changed)

        roots = self._single_unknown_roots(eq, lo, hi)
        if roots is not None:
            v, values = roots
            values = [r for r in values if lo[v] <= r <= hi[v]]
            if not values:
                raise _Conflict()
            narrow(v, values[0], values[-1], lo, hi, changed)
        elif all(lo[v] == hi[v] for v in eq.indices):
            vals = [lo[v] for v in range(self.n + 1)]
            if not eq.holds(vals[1:]):
                raise _Conflict()
        return changed

    @staticmethod
    def _single_unknown_roots(eq: EnEquation, lo, hi):
        """(v, sorted roots) when exactly one distinct variable is open"""
        open_vars = {v for v in eq.indices if lo[v] != hi[v]}
        if len(open_vars) != 1 or eq.kind == 'one':
            return None
        u = open_vars.pop()
        i, j, k = eq.indices
        val = lambda v: lo[v]
        if eq.kind == 'add':
            a2 = 0
            b1 = (i == u) + (j == u) - (k == u)
            c0 = (0 if i == u else val(i)) + (0 if j == u else val(j)) - (0 if k == u else val(k))
        else:
            a2 = b1 = c0 = 0
            if i == u and j == u:
                a2 = 1
            elif i == u:
                b1 += val(j)
            elif j == u:
                b1 += val(i)
            else:
                c0 += val(i) * val(j)
            if k == u:
                b1 -= 1
            else:
                c0 -= val(k)
        roots = _int_roots(a2, b1, c0)
        if roots is None:
            return None
        return u, roots

    # Branching

    def _candidates(self, v: int, lo, hi):
        """Candidate values for v, as a list or a range"""
        best = range(lo[v], hi[v] + 1)
        for eq in self.watch[v]:
            if eq.kind != 'mul':
                continue
            i, j, k = eq.indices
            if i == j or v == k or lo[k] != hi[k] or lo[k] == 0:
                continue
            w = j if v == i else i
            if lo[w] == hi[w]:
                continue
            target = lo[k]
            if abs(target).bit_length() > DIVISOR_BITS or _size(best) <= 2:
                continue
            cands = []
            for d in _positive_divisors(abs(target)):
                for s in (-d, d):
                    if lo[v] <= s <= hi[v] and lo[w] <= target // s <= hi[w]:
                        cands.append(s)
            cands.sort()
            if len(cands) < _size(best):
                best = cands
        return best

    def _choose(self, open_vars: Sequence[int], lo, hi):
        best_key = None
        best = None
        for v in open_vars:
            cands = self._candidates(v, lo, hi)
            key = (_size(cands), -self.membership[v], v)
            if best_key is None or key < best_key:
                best_key = key
                best = (v, cands)
        return best

    # Enumeration

    def enumerate(self, lo, hi, cap: Optional[int] = None, first_only: bool = False,
                  queue=None) -> List[Tuple[int, ...]]:
        """All solutions under the given intervals (at most cap)"""
        found: List[Tuple[int, ...]] = []
        stop = 1 if first_only else cap
        self._enumerate(list(lo), list(hi), found, stop, queue)
        return found

    def _enumerate(self, lo, hi, found, stop, queue):
        if not self.propagate(lo, hi, queue):
            return False
        open_vars = [v for v in range(1, self.n + 1) if lo[v] != hi[v]]
        if not open_vars:
            found.append(tuple(lo[1:]))
            return stop is not None and len(found) >= stop
        v, cands = self._choose(open_vars, lo, hi)
        for c in cands:
            lo2, hi2 = list(lo), list(hi)
            lo2[v] = hi2[v] = c
            if self._enumerate(lo2, hi2, found, stop, self.watch[v]):
                return True
        return False

    def root_branch(self, lo, hi):
        """Propagate at the root; return (lo, hi, var, candidates) or None"""
        lo, hi = list(lo), list(hi)
        if not self.propagate(lo, hi):
            return None
        open_vars = [v for v in range(1, self.n + 1) if lo[v] != hi[v]]
        if not open_vars:
            return lo, hi, None, []
        v, cands = self._choose(open_vars, lo, hi)
        return lo, hi, v, cands

    # Counting

    def count(self, lo, hi) -> int:
        """Number of solutions, multiplying independent components"""
        lo, hi = list(lo), list(hi)
        return self._count(lo, hi, set(range(1, self.n + 1)), None)

    def split(self, lo, hi, focus, queue):
        """Propagate, then (free, groups): the product of unconstrained widths
        and the connected components of constrained open variables.
        None when propagation fails; lo and hi are narrowed in place."""
        if not self.propagate(lo, hi, queue):
            return None
        open_vars = sorted(v for v in focus if lo[v] != hi[v])

        parent = {v: v for v in open_vars}

        def find(v):
            while parent[v] != v:
                parent[v] = parent[parent[v]]
                v = parent[v]
            return v

        constrained = set()
        for v in open_vars:
            for eq in self.watch[v]:
                others = [w for w in eq.variables() if w in parent]
                if len(others) == 1 and self._single_unknown_roots(eq, lo, hi) is None:
                    continue  # holds for every value of the open variable
                constrained.update(others)
                for w in others[1:]:
                    ra, rb = find(others[0]), find(w)
                    if ra != rb:
                        parent[max(ra, rb)] = min(ra, rb)

        free = 1
        for v in open_vars:
            if v not in constrained:
                free *= hi[v] - lo[v] + 1
        groups: Dict[int, List[int]] = {}
        for v in open_vars:
            if v in constrained:
                groups.setdefault(find(v), []).append(v)
        return free, list(groups.values())

    def count_branch(self, lo, hi, comp, var: int, values) -> int:
        """Solutions of one component summed over the listed values of var"""
        subtotal = 0
        for c in values:
            lo2, hi2 = list(lo), list(hi)
            lo2[var] = hi2[var] = c
            subtotal += self._count(lo2, hi2, set(comp), self.watch[var])
        return subtotal

    def _count(self, lo, hi, focus, queue) -> int:
        parts = self.split(lo, hi, focus, queue)
        if parts is None:
            return 0
        total, groups = parts
        if not groups:
            return total

        if len(groups) > 1:
            for comp in groups:
                sub = self._count(list(lo), list(hi), set(comp), [])
                if sub == 0:
                    return 0
                total *= sub
            return total

        comp = groups[0]
        v, cands = self._choose(comp, lo, hi)
        return total * self.count_branch(lo, hi, comp, v, cands)


def _box_domains(n: int, bound: int) -> Tuple[List[int], List[int]]:
    # index 0 is unused so variable indices stay 1-based
    return [0] + [-bound] * n, [0] + [bound] * n


def _split_shards(cands) -> List[Sequence[int]]:
    total = _size(cands)
    size = max(1, -(-total // MAX_SHARDS))
    return [cands[i:i + size] for i in range(0, total, size)]


def _run_shard(solver: EnSolver, lo, hi, var: int, shard, cap: Optional[int]) -> List[Tuple[int, ...]]:
    found: List[Tuple[int, ...]] = []
    for c in shard:
        lo2, hi2 = list(lo), list(hi)
        lo2[var] = hi2[var] = c
        remaining = None if cap is None else cap - len(found)
        found.extend(solver.enumerate(lo2, hi2, cap=remaining, queue=solver.watch[var]))
        if cap is not None and len(found) >= cap:
            break
    return found


def _enumerate_shard(payload):
    system, lo, hi, var, shard, cap = payload
    solver = EnSolver(system)
    return _run_shard(solver, lo, hi, var, shard, cap), solver.nodes


def _count_job(payload):
    system, lo, hi, comp, var, values = payload
    solver = EnSolver(system)
    if var is None:
        return solver._count(list(lo), list(hi), set(comp), []), solver.nodes
    return solver.count_branch(lo, hi, comp, var, values), solver.nodes


def _count_sharded(solver: EnSolver, lo, hi, workers: int) -> Tuple[int, int]:
    """Count over a process pool: one job per component, or per shard of
    the top-level branch when everything is one component"""
    parts = solver.split(lo, hi, set(range(1, solver.n + 1)), None)
    if parts is None:
        return 0, solver.nodes
    free, groups = parts
    if not groups:
        return free, solver.nodes
    if len(groups) > 1:
        payloads = [(solver.system, lo, hi, comp, None, None) for comp in groups]
    else:
        comp = groups[0]
        var, cands = solver._choose(comp, lo, hi)
        payloads = [(solver.system, lo, hi, comp, var, shard) for shard in _split_shards(cands)]

    logger.debug(f"🚀 Counting {len(payloads)} jobs on {workers} workers")
    with ProcessPoolExecutor(max_workers=workers) as executor:
        results = list(executor.map(_count_job, payloads))
    nodes = solver.nodes + sum(r[1] for r in results)
    if len(groups) > 1:
        return free * math.prod(r[0] for r in results), nodes
    return free * sum(r[0] for r in results), nodes


def solve(system: EnSystem,
          domains: Sequence[Tuple[int, int]],
          limit: Optional[int] = None,
          count_only: bool = False,
          first_only: bool = False,
          node_budget: Optional[int] = None,
          workers: int = 1) -> SolveResult:
    """Solve a system with one closed interval per variable

    Args:
        system: The E_n system
        domains: (lo, hi) for x1..xn
        limit: Keep at most this many solutions (sorted); truncation is flagged
        count_only: Only count, splitting independent components
        first_only: Stop at the first solution found
        node_budget: Raise SearchBudgetExhausted past this many nodes
        workers: Processes for the sharded top-level branch

    The top-level branch is always cut into the same shards, so the
    result does not depend on the worker count.
    """
    if len(domains) != system.n:
        raise ArityError(system.n, len(domains))
    lo = [0] + [d[0] for d in domains]
    hi = [0] + [d[1] for d in domains]
    if any(a > b for a, b in zip(lo, hi)):
        return SolveResult()

    solver = EnSolver(system, node_budget)

    if count_only:
        if workers > 1 and node_budget is None:
            total, nodes = _count_sharded(solver, lo, hi, workers)
            return SolveResult(count=total, nodes=nodes)
        total = solver.count(lo, hi)
        return SolveResult(count=total, nodes=solver.nodes)

    if first_only:
        found = solver.enumerate(lo, hi, first_only=True)
        return SolveResult(solutions=found, count=len(found), nodes=solver.nodes)

    root = solver.root_branch(lo, hi)
    if root is None:
        return SolveResult(nodes=solver.nodes)
    lo, hi, var, cands = root
    if var is None:
        return SolveResult(solutions=[tuple(lo[1:])], count=1, nodes=solver.nodes)

    cap = None if limit is None else limit + 1
    payloads = [(system, lo, hi, var, shard, cap) for shard in _split_shards(cands)]

    if workers > 1 and len(payloads) > 1 and node_budget is None:
        logger.debug(f"🚀 Sharding x{var} over {len(payloads)} shards on {workers} workers")
        with ProcessPoolExecutor(max_workers=workers) as executor:
            results = list(executor.map(_enumerate_shard, payloads))
    else:
        results = [(_run_shard(solver, lo, hi, var, shard, cap), 0) for shard in _split_shards(cands)]

    merged = sorted(set(itertools.chain.from_iterable(r[0] for r in results)))
    nodes = solver.nodes + sum(r[1] for r in results)
    truncated = limit is not None and len(merged) > limit
    if truncated:
        merged = merged[:limit]
    return SolveResult(solutions=merged, count=len(merged), truncated=truncated, nodes=nodes)


def enumerate_box(system: EnSystem, bound: int, limit: Optional[int] = None,
                  workers: int = 1) -> SolutionSet:
    """All solutions in [-B, B]^n, sorted

    When more than ``limit`` solutions exist the set is cut to the first
    ``limit`` and flagged as truncated.
    """
    if bound < 0:
        raise ValueError(f"Box radius must be non-negative, got {bound}")
    if limit is None:
        from config import DEFAULTS
        limit = DEFAULTS.search.default_limit
    result = solve(system, [(-bound, bound)] * system.n, limit=limit, workers=workers)
    if result.truncated:
        logger.warning(f"⚠ Solution list truncated at {limit} entries")
    return SolutionSet(
        n=system.n,
        box_radius=bound,
        solutions=result.solutions,
        truncated=result.truncated,
        count=None if result.truncated else len(result.solutions),
    )


def count_solutions(system: EnSystem, bound: int, node_budget: Optional[int] = None,
                    workers: int = 1) -> int:
    """Exact number of solutions in [-B, B]^n

    With workers > 1 independent components, or the shards of the
    top-level branch, are counted in separate processes.
    """
    if bound < 0:
        raise ValueError(f"Box radius must be non-negative, got {bound}")
    result = solve(system, [(-bound, bound)] * system.n, count_only=True,
                   node_budget=node_budget, workers=workers)
    logger.debug(f"🔢 Counted {result.count} solutions in {result.nodes} nodes")
    return result.count


def naive_enumerate(system: EnSystem, bound: int) -> List[Tuple[int, ...]]:
    """Full box scan without propagation (reference oracle, tiny inputs only)"""
    values = range(-bound, bound + 1)
    return [x for x in itertools.product(values, repeat=system.n) if check_solution(system, x)]


def find_in_annulus(system: EnSystem, low: int, high: int,
                    coordinates: Optional[Iterable[int]] = None,
                    node_budget: Optional[int] = None) -> Optional[Tuple[int, ...]]:
    """First solution in [-high, high]^n with |x_i| > low for some listed i

    Coordinates are tried in the given order, positive side first.
    """
    if high <= low:
        return None
    coords = list(coordinates) if coordinates is not None else list(range(1, system.n + 1))
    solver = EnSolver(system, node_budget)
    for i in coords:
        for side in ((low + 1, high), (-high, -low - 1)):
            lo, hi = _box_domains(system.n, high)
            lo[i], hi[i] = side
            found = solver.enumerate(lo, hi, first_only=True)
            if found:
                return found[0]
    return None


def shell_filter(solutions: Iterable[Sequence[int]], alpha: int) -> List[Tuple[int, ...]]:
    """Keep tuples whose max-norm is exactly alpha"""
    return [tuple(s) for s in solutions if max((abs(v) for v in s), default=0) == alpha]


def induced_system(x: Sequence[int]) -> EnSystem:
    """Every E_n equation satisfied by x"""
    if not x:
        raise ValueError("Tuple must be non-empty")
    n = len(x)
    where: Dict[int, List[int]] = {}
    for idx, value in enumerate(x, start=1):
        where.setdefault(value, []).append(idx)

    eqs = [EnEquation.one(i) for i in where.get(1, [])]
    for i in range(1, n + 1):
        for j in range(i, n + 1):
            for k in where.get(x[i - 1] + x[j - 1], []):
                eqs.append(EnEquation.add(i, j, k))
            for k in where.get(x[i - 1] * x[j - 1], []):
                eqs.append(EnEquation.mul(i, j, k))
    return EnSystem(n, eqs)


def permute_tuple(x: Sequence[int], perm: Sequence[int]) -> Tuple[int, ...]:
    """Move x[old] to position perm[old-1]"""
    y = [0] * len(x)
    for old, value in enumerate(x):
        y[perm[old] - 1] = value
    return tuple(y)


def rename_system(system: EnSystem, perm: Sequence[int]) -> EnSystem:
    return EnSystem(system.n, (eq.renamed(perm) for eq in system.equations))


def canonical_form(system: EnSystem) -> Tuple[EnSystem, Tuple[int, ...]]:
    """Minimal renaming of the system and the permutation that produces it

    Systems are ordered by their sorted equation keys; the first minimal
    permutation in lexicographic order wins.
    """
    if system.n > CANONICAL_MAX_N:
        raise InfeasibleError(f"canonical_form supports n <= {CANONICAL_MAX_N}, got n={system.n}")
    best_keys = None
    best_perm = None
    for perm in itertools.permutations(range(1, system.n + 1)):
        keys = tuple(sorted(eq.renamed(perm).sort_key() for eq in system.equations))
        if best_keys is None or keys < best_keys:
            best_keys = keys
            best_perm = perm
    return rename_system(system, best_perm), tuple(best_perm)

"""Tests for compact and canonical lowering and the gadget library"""

import itertools
import json
from pathlib import Path

import pytest

from ensys import EnEquation, EnSystem, check_solution, enumerate_box, solve
from errors import InfeasibleError
from lower import (
    LoweringMap,
    assemble_finite_fold_system,
    gadget_nonneg,
    gadget_value_chain,
    lower_canonical,
    lower_compact,
    lower_compact_system,
)
from poly import Polynomial, evaluate, parse_equation, parse_polynomial

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture
def worked_lowering():
    """Compact lowering of the worked quintic"""
    return lower_compact(parse_equation("x1^5 - x1 = x2^2 - x2"))


def _is_identity(eq: EnEquation, meaning) -> bool:
    if eq.kind == 'one':
        return meaning[eq.indices[0]] == 1
    i, j, k = eq.indices
    if eq.kind == 'add':
        return meaning[i] + meaning[j] == meaning[k]
    return meaning[i] * meaning[j] == meaning[k]


def test_worked_example_shape(worked_lowering):
    """Seven variables, six equations, the two sides meet in x6"""
    expected = EnSystem(7, [
        EnEquation.mul(1, 1, 3),
        EnEquation.mul(3, 3, 4),
        EnEquation.mul(1, 4, 5),
        EnEquation.add(1, 6, 5),
        EnEquation.mul(2, 2, 7),
        EnEquation.add(2, 6, 7),
    ])
    assert worked_lowering.target == expected
    assert worked_lowering.q == 6
    assert str(worked_lowering.var_meaning[6]) == "x1^5 - x1"


def test_worked_example_matches_fixtures(worked_lowering):
    """Shipped fixture files are what the lowering produces"""
    from ensys import load_system
    assert load_system(str(FIXTURES / "worked_example.json")) == worked_lowering.target
    data = json.loads((FIXTURES / "worked_example_map.json").read_text(encoding="utf-8"))
    assert data == worked_lowering.to_json()


def test_lowering_map_json_round_trip(worked_lowering):
    """from_json rebuilds meanings and q"""
    data = worked_lowering.to_json()
    rebuilt = LoweringMap.from_json(data, worked_lowering.target, 2)
    assert rebuilt.q == 6
    assert rebuilt.var_meaning == worked_lowering.var_meaning
    assert rebuilt.extend((2, 6)) == worked_lowering.extend((2, 6))


def test_compact_soundness(worked_lowering):
    """The extended tuple solves the system iff the point solves the equation"""
    eq = worked_lowering.source
    for point in itertools.product(range(-5, 6), repeat=2):
        assert check_solution(worked_lowering.target, worked_lowering.extend(point)) == eq.holds_at(point)


def test_compact_completeness(worked_lowering):
    """Every solution in the derived domains projects to a solution"""
    eq = worked_lowering.source
    found = solve(worked_lowering.target, worked_lowering.domains(3)).solutions
    projected = sorted({worked_lowering.project(s) for s in found})
    assert projected == [(-1, 0), (-1, 1), (0, 0), (0, 1), (1, 0), (1, 1)]
    assert all(eq.holds_at(p) for p in projected)


def test_compact_every_equation_is_identity(worked_lowering):
    """Apart from the meeting point, the lowering only states ring identities"""
    meaning = worked_lowering.var_meaning
    closing = worked_lowering.closing
    assert closing == [EnEquation.add(2, 6, 7)]
    assert not _is_identity(closing[0], meaning)
    rest = [eq for eq in worked_lowering.target if eq not in closing]
    assert len(rest) == len(worked_lowering.target) - 1
    assert all(_is_identity(eq, meaning) for eq in rest)


def test_compact_identity_equation():
    """x1 = x1 lowers to an empty system over one variable"""
    lowering = lower_compact(parse_equation("x1 = x1"))
    assert lowering.n == 1
    assert len(lowering.target) == 0
    assert lowering.q is None


def test_compact_constant_uses_one_variable():
    """x1*x1 = 2 builds 2 from a 1-variable and has no solutions"""
    lowering = lower_compact(parse_equation("x1*x1 = 2"))
    kinds = [eq.kind for eq in lowering.target]
    assert 'one' in kinds
    assert any(eq.kind == 'mul' and eq.indices[:2] == (1, 1) for eq in lowering.target)
    assert enumerate_box(lowering.target, 3).solutions == []


@pytest.mark.parametrize("text,value", [
    ("x1 = 2^400", 2 ** 400),
    ("x1 = 3^300", 3 ** 300),
    ("x1 + 1 = 2^1000", 2 ** 1000 - 1),
])
def test_compact_wide_constants(text, value):
    """Constants far wider than the recursion limit lower to a bit-length chain"""
    lowering = lower_compact(parse_equation(text))
    assert check_solution(lowering.target, lowering.extend((value,)))
    assert not check_solution(lowering.target, lowering.extend((value + 1,)))
    assert len(lowering.target) <= 3 * value.bit_length()
    assert all(_is_identity(eq, lowering.var_meaning) for eq in lowering.target
               if eq not in lowering.closing)


def test_compact_system_shares_subexpressions():
    """Two equations over one DAG reuse x1^2"""
    lowering = lower_compact_system([
        parse_equation("x1^2 = x2"),
        parse_equation("x1^2 + 1 = x3"),
    ])
    squares = [i for i, m in lowering.var_meaning.items() if str(m) == "x1^2"]
    assert len(squares) == 1
    assert len(lowering.result_vars) == 2
    for point in itertools.product(range(-3, 4), repeat=3):
        holds = point[1] == point[0] ** 2 and point[2] == point[0] ** 2 + 1
        assert check_solution(lowering.target, lowering.extend(point)) == holds


def test_canonical_x1_minus_one():
    """card(T) = 9 variables; projections are {1}"""
    lowering = lower_canonical(parse_polynomial("x1 - 1"))
    assert lowering.n == 9
    assert lowering.closing == [EnEquation.add(lowering.q, lowering.q, lowering.q)]
    projected = {lowering.project(s) for s in enumerate_box(lowering.target, 2).solutions}
    assert projected == {(1,)}


def test_canonical_variable_itself():
    """D = x1 puts q on x1, forcing x1 = 0"""
    lowering = lower_canonical(parse_polynomial("x1"))
    assert lowering.q == 1
    projected = {lowering.project(s) for s in enumerate_box(lowering.target, 2).solutions}
    assert projected == {(0,)}


def test_canonical_square():
    """D = x1^2 has 27 members and only x1 = 0"""
    lowering = lower_canonical(parse_polynomial("x1^2"))
    assert lowering.n == 27
    projected = {lowering.project(s) for s in enumerate_box(lowering.target, 3).solutions}
    assert projected == {(0,)}


def test_canonical_emits_only_identities():
    """Every equation except the closing one holds in the polynomial ring"""
    lowering = lower_canonical(parse_polynomial("x1 - 1"))
    closing = set(lowering.closing)
    for eq in lowering.target:
        if eq not in closing:
            assert _is_identity(eq, lowering.var_meaning), eq


def test_canonical_cap_is_enforced():
    """The worked quintic needs 3^18 members and is refused"""
    with pytest.raises(InfeasibleError) as exc:
        lower_canonical(parse_equation("x1^5 - x1 = x2^2 - x2").normalized)
    assert "3^18" in str(exc.value)
    with pytest.raises(InfeasibleError):
        lower_canonical(parse_polynomial("x1 - 1"), cap=8)


def test_value_chain_examples():
    """Chains force their output to n"""
    one = gadget_value_chain(1)
    assert one.equations == [EnEquation.one(1)]
    assert one.output == 1

    two = gadget_value_chain(2)
    assert two.equations == [EnEquation.one(1), EnEquation.add(1, 1, 2)]
    assert two.output == 2

    five = gadget_value_chain(5)
    assert len(five.equations) == 5
    system = EnSystem(5, five.equations)
    assert enumerate_box(system, 6).solutions == [(1, 2, 3, 4, 5)]


def test_value_chain_rejects_zero():
    """n must be positive"""
    with pytest.raises(ValueError):
        gadget_value_chain(0)


def test_nonneg_gadget_accepts_two():
    """Target forced to 2 is a sum of four squares"""
    chain = gadget_value_chain(2, first_free=2, output=1)
    block = gadget_nonneg(1, chain.next_free)
    assert len(block.fresh) == 10
    system = EnSystem(block.next_free - 1, chain.equations + block.equations)
    found = solve(system, [(-2, 2)] * system.n, first_only=True).solutions
    assert found and found[0][0] == 2
    assert check_solution(system, found[0])


def test_nonneg_gadget_rejects_negative():
    """Target forced to -1 has no solution"""
    forced = [EnEquation.one(2), EnEquation.add(1, 2, 3), EnEquation.add(3, 3, 3)]
    block = gadget_nonneg(1, 4)
    system = EnSystem(block.next_free - 1, forced + block.equations)
    assert enumerate_box(system, 3).solutions == []


def test_finite_fold_assembly_size():
    """n + 11(m - 1) variables"""
    system = assemble_finite_fold_system(5, 3)
    assert system.n == 27
    assert assemble_finite_fold_system(4, 1).n == 4


def test_finite_fold_assembly_forces_x1():
    """x1 = n in every solution"""
    system = assemble_finite_fold_system(3, 1)
    assert enumerate_box(system, 4).solutions == [(3, 1, 2)]


def test_finite_fold_rejects_wide_delta():
    """delta may only use x1..xm"""
    with pytest.raises(ValueError):
        assemble_finite_fold_system(3, 1, delta=EnSystem(2, [EnEquation.one(2)]))


def test_meaning_bounds(worked_lowering):
    """Bounds follow sum |c| B^deg"""
    bounds = worked_lowering.meaning_bounds(2)
    assert bounds[4] == 32
    assert bounds[5] == 34
    assert worked_lowering.domains(2)[0] == (-2, 2)
    assert evaluate(worked_lowering.var_meaning[5], (2, 0)) == 32
    assert isinstance(worked_lowering.var_meaning[1], Polynomial)

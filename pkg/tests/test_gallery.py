"""Scenario tests for the explicit constructions and the worked quintic"""

from pathlib import Path

import pytest

from bounds import conjecture_bound, within
from ensys import check_solution, count_solutions, enumerate_box, load_system
from gallery import (
    FIXTURES,
    assemble_thm8_witness,
    build_chain,
    build_thm7,
    build_thm8,
    gadget_demo,
    thm8_lemma8_chain,
    thm8_parameters,
    worked_example,
    write_fixtures,
)

SHIPPED = Path(__file__).resolve().parent.parent / "fixtures"

QUINTIC_SOLUTIONS = [
    (-1, 0), (-1, 1), (0, 0), (0, 1), (1, 0), (1, 1),
    (2, -5), (2, 6), (3, -15), (3, 16), (30, -4929), (30, 4930),
]


def test_scenario_worked_example():
    """Scenario: x1^5 - x1 = x2^2 - x2 under the E_7 bound

    Expected:
    - Lowered to 7 variables, bound 2^(2^6)
    - Scan ends at floor((2^64)^(1/5)) = 7131
    - Exactly twelve integer solutions
    """
    report = worked_example()
    assert report.n == 7
    assert report.bound.to_string() == "2^(2^6)"
    assert report.x1_ceiling == 7131
    assert report.solutions == QUINTIC_SOLUTIONS
    for s in report.solutions:
        assert check_solution(report.lowering.target, report.lowering.extend(s))
    data = report.to_jsonable()
    assert data["scan"] == [-2, 7131]
    assert data["solutions"][-1] == [30, 4930]
    assert "Integer solutions (12):" in report.to_text()
    print("✅ Scenario worked example PASSED: twelve solutions")


def test_worked_example_workers_agree():
    """Process pool scanning gives the same list"""
    assert worked_example(workers=4).to_jsonable() == worked_example(workers=1).to_jsonable()


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
def test_scenario_chain(n):
    """Scenario: the squaring chain has zero and one tuple at the bound"""
    top = 2 ** (2 ** (n - 1))
    result = enumerate_box(build_chain(n), top)
    expected_top = tuple(2 ** (2 ** i) for i in range(n))
    assert result.solutions == [(0,) * n, expected_top]
    assert within(top, conjecture_bound(n))
    assert not within(top + 1, conjecture_bound(n))
    print(f"✅ Scenario chain n={n} PASSED")


def test_chain_rejects_short():
    """n = 1 has no chain"""
    with pytest.raises(ValueError):
        build_chain(1)


@pytest.mark.parametrize("n", [10, 11, 12, 13, 14])
def test_scenario_thm7_counts(n):
    """Scenario: 1156 * 2^(n-10) solutions inside the bound"""
    system = build_thm7(n)
    assert count_solutions(system, 2 ** 16) == 1156 * 2 ** (n - 10)
    print(f"✅ Scenario many solutions n={n} PASSED")


def test_thm7_forces_x6():
    """Every solution has x6 = 2^16 and divisor pairs on x7..x10"""
    result = enumerate_box(build_thm7(10), 2 ** 16, limit=2000)
    assert len(result.solutions) == 1156
    for s in result.solutions:
        assert s[5] == 65536
        assert s[6] * s[7] == 65536
        assert s[8] * s[9] == 65536


def test_thm7_rejects_small_n():
    """n below 10 is refused"""
    with pytest.raises(ValueError):
        build_thm7(9)


def test_thm8_parameters():
    """Base and Pell modulus for depth 2 and depth 4"""
    assert thm8_parameters(4) == {"depth": 4, "base": 65536, "modulus": 65536 ** 3 * 65538}
    assert thm8_parameters(2)["base"] == 16
    assert thm8_parameters(2)["modulus"] == 73728
    with pytest.raises(ValueError):
        thm8_parameters(5)


def test_thm8_shape():
    """19 equations over 21 variables at every depth"""
    for depth in (2, 3, 4):
        system = build_thm8(depth)
        assert system.n == 21
        assert len(system) == 19


def test_scenario_thm8_depth2():
    """Scenario: reduced-depth witness solves the system and clears b + b^(b-2)

    Expected:
    - b = 16, so |x11| >= 16 + 16^14
    - x12 stays below the conjectured E_21 bound at this depth
    """
    witness = assemble_thm8_witness(2)
    assert check_solution(build_thm8(2), witness)
    assert witness[5] == 16
    assert abs(witness[10]) >= 16 + 16 ** 14

    chain = thm8_lemma8_chain(2)
    assert chain.base == 16
    assert chain.lower_bound_holds
    assert chain.x12_exceeds_square_bound
    assert chain.solution_checks
    assert not chain.exceeds_conjecture_bound
    assert set(chain.to_jsonable()) == {
        "depth", "base", "modulus", "x11_bits", "lower_bound_holds",
        "x12_exceeds_square_bound", "exceeds_conjecture_bound", "solution_checks",
    }
    print("✅ Scenario reduced-depth witness PASSED")


def test_thm8_second_pell_solution():
    """Later Pell solutions also assemble into witnesses"""
    assert check_solution(build_thm8(2), assemble_thm8_witness(2, k=2))


def test_scenario_thm8_full_depth():
    """Scenario: at b = 2^16 the witness leaves the conjectured E_21 bound"""
    chain = thm8_lemma8_chain(4)
    assert chain.base == 65536
    assert chain.lower_bound_holds
    assert chain.x12_exceeds_square_bound
    assert chain.exceeds_conjecture_bound
    assert chain.solution_checks
    assert chain.x11_bits > 2 ** 20
    print("✅ Scenario full-depth witness PASSED")


def test_gadget_demo():
    """n + 11(m - 1) variables"""
    demo = gadget_demo(5, 3)
    assert demo["variables"] == 27
    assert demo["expected_variables"] == 27
    assert demo["equations"] > 0


def test_write_fixtures_matches_shipped(tmp_path):
    """Regenerated fixtures are byte-identical to the shipped ones"""
    written = write_fixtures(str(tmp_path))
    assert len(written) == len(FIXTURES) + 2
    for path in written:
        name = Path(path).name
        assert Path(path).read_bytes() == (SHIPPED / name).read_bytes(), name


def test_shipped_fixtures_load():
    """Shipped system files equal their builders"""
    for name, builder in FIXTURES.items():
        assert load_system(str(SHIPPED / name)) == builder()

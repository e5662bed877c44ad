"""Tests for probes, system classification and the shell search"""

import pytest

from ensys import EnEquation, EnSystem, check_solution, induced_system
from explorer import (
    EXHAUSTED,
    FINITE_WITHIN_BOUND,
    GROWING_FAMILY,
    SOLUTION_BEYOND_BOUND,
    UNKNOWN,
    VACUOUS,
    WITNESS_FOUND,
    Classification,
    classify,
    probe,
    read_jsonl,
    semi_algorithm_infinite,
    survey,
    survey_systems,
    survey_table,
    write_jsonl,
)
from gallery import build_chain
from poly import parse_equation, parse_polynomial


# probe

def test_probe_single_value_finds_larger():
    """No relations hold at 5, so 6 is a witness"""
    verdict = probe((5,), 10)
    assert verdict.kind == WITNESS_FOUND
    assert verdict.witness == (6,)
    assert verdict.relations == 0


@pytest.mark.parametrize("x", [(1, 2), (0, 0), (4, 16), (-4, 1)])
def test_probe_vacuous(x):
    """|x1| within 2^(2^(n-1)) is vacuous"""
    assert probe(x, 100).kind == VACUOUS


def test_probe_horizon_must_exceed_tuple():
    """Horizon at or below max |x_i| is rejected"""
    with pytest.raises(ValueError):
        probe((5,), 5)
    with pytest.raises(ValueError):
        probe((), 10)


def test_probe_lax_and_strict():
    """x1 * x1 = x2 at (5, 25): lax finds a larger x2, strict needs a larger x1"""
    lax = probe((5, 25), 30)
    assert lax.kind == WITNESS_FOUND
    y = lax.witness
    assert y[0] * y[0] == y[1]
    assert max(abs(v) for v in y) > 5

    strict = probe((5, 25), 30, strict=True)
    assert strict.kind == EXHAUSTED
    assert strict.witness is None


def test_probe_witness_satisfies_relations():
    """Witnesses keep every Add/Mul relation of the probed tuple"""
    x = (20, 40, 60)
    verdict = probe(x, 100)
    assert verdict.kind == WITNESS_FOUND
    relations = EnSystem(3, [eq for eq in induced_system(x) if eq.kind != 'one'])
    assert check_solution(relations, verdict.witness)


def test_probe_budget_exhaustion():
    """A zero node budget reports Exhausted"""
    verdict = probe((5,), 1000, node_budget=0)
    assert verdict.kind == EXHAUSTED
    assert verdict.to_jsonable() == {"kind": EXHAUSTED, "witness": None, "horizon": 1000, "relations": 0}


# classify

def test_classify_forced_zero():
    """x1 + x1 = x1 only has 0"""
    c = classify(EnSystem(1, [EnEquation.add(1, 1, 1)]), growth_box=100)
    assert c.status == FINITE_WITHIN_BOUND
    assert c.max_norm_seen == 0
    assert c.evidence["count_within_bound"] == 1


def test_classify_chain_is_tight():
    """The two-variable chain reaches the bound exactly"""
    c = classify(build_chain(2), growth_box=100)
    assert c.status == FINITE_WITHIN_BOUND
    assert c.max_norm_seen == 4
    assert c.evidence["bound"] == 4
    assert c.evidence["count_within_bound"] == 2


def test_classify_growing_family():
    """Squares keep growing"""
    c = classify(EnSystem(2, [EnEquation.mul(1, 1, 2)]), growth_box=100)
    assert c.status == GROWING_FAMILY
    outer = c.evidence["outer_witness"]
    assert outer[0] * outer[0] == outer[1]
    assert 50 < max(abs(v) for v in outer) <= 100


def test_classify_solution_beyond_bound():
    """A finite family past a lowered bound is flagged"""
    c = classify(build_chain(3), bound=4, growth_box=100)
    assert c.status == SOLUTION_BEYOND_BOUND
    assert c.evidence["beyond_witness"] == (2, 4, 16)
    assert c.evidence["outer_witness"] is None
    assert c.max_norm_seen == 16


def test_classify_unknown_on_budget():
    """Running out of nodes gives Unknown"""
    c = classify(EnSystem(2, [EnEquation.mul(1, 1, 2)]), growth_box=100, node_budget=1)
    assert c.status == UNKNOWN


# survey

def test_survey_systems_n1():
    """All eight subsets of E_1 are distinct canonical systems"""
    systems = survey_systems(1)
    assert len(systems) == 8
    assert systems == sorted(systems, key=lambda s: s.sort_keys())


def test_survey_systems_n3_is_seeded():
    """The n = 3 sample depends only on the seed"""
    first = survey_systems(3, seed=5, samples=10)
    again = survey_systems(3, seed=5, samples=10)
    assert first == again
    assert all(s.n == 3 for s in first)


def test_survey_systems_rejects_large_n():
    """n above 3 is refused"""
    with pytest.raises(ValueError):
        survey_systems(4)


def test_survey_n1():
    """Every system over one variable is classified"""
    results = survey(1, growth_box=100)
    statuses = {tuple(tuple(eq.to_json()) for eq in c.system): c.status for c in results}
    assert statuses[(("add", 1, 1, 1),)] == FINITE_WITHIN_BOUND
    assert statuses[()] == GROWING_FAMILY
    assert statuses[(("one", 1),)] == FINITE_WITHIN_BOUND
    assert SOLUTION_BEYOND_BOUND not in statuses.values()


def test_survey_is_deterministic_across_workers():
    """Worker count does not change the report"""
    single = survey(1, growth_box=100, workers=1)
    double = survey(1, growth_box=100, workers=4)
    assert [c.to_jsonable() for c in single] == [c.to_jsonable() for c in double]


def test_survey_n2_has_no_candidates():
    """Every system over two variables respects the bound at the default growth box"""
    results = survey(2, growth_box=10 ** 4)
    assert len(results) == 8256
    assert not [c for c in results if c.status == SOLUTION_BEYOND_BOUND]
    chain = [c for c in results if c.system == build_chain(2)]
    assert chain and chain[0].max_norm_seen == 4
    squaring = EnSystem(2, [EnEquation.mul(1, 1, 2)])
    growing = [c for c in results if c.system == squaring]
    assert growing and growing[0].status == GROWING_FAMILY


def test_jsonl_round_trip(tmp_path):
    """Reports survive a write and read"""
    results = survey(1, growth_box=100)
    path = write_jsonl(results, str(tmp_path / "survey.jsonl"))
    lines = (tmp_path / "survey.jsonl").read_text(encoding="utf-8").splitlines()
    assert len(lines) == len(results)
    assert all(' ' not in line for line in lines)
    loaded = read_jsonl(path)
    assert [c.to_jsonable() for c in loaded] == [c.to_jsonable() for c in results]
    assert isinstance(loaded[0], Classification)


def test_write_jsonl_does_not_overwrite(tmp_path):
    """An existing report is kept and the new one renamed"""
    target = tmp_path / "survey.jsonl"
    target.write_text("keep\n", encoding="utf-8")
    path = write_jsonl(survey(1, growth_box=100), str(target))
    assert path != str(target)
    assert target.read_text(encoding="utf-8") == "keep\n"


def test_survey_table_columns():
    """One row per classification"""
    df = survey_table(survey(1, growth_box=100))
    assert list(df.columns) == ['system', 'n', 'equations', 'status', 'max_norm',
                                'count_within_bound', 'beyond_witness', 'outer_witness']
    assert len(df) == 8
    assert "(empty)" in df['system'].tolist()


# semi_algorithm_infinite

def test_semi_terminates_on_diagonal():
    """x1 = x2 has zeros on every shell"""
    report = semi_algorithm_infinite(parse_polynomial("x1 - x2", 2), alpha_start_override=3, alpha_cutoff=10)
    assert report.status == 'terminated'
    assert report.shell == 3
    assert report.witness == (3, 3)
    assert report.solutions == [(-3, -3), (3, 3)]


def test_semi_exhausts_without_zeros():
    """x1^2 + x2^2 + 1 never vanishes"""
    report = semi_algorithm_infinite(parse_polynomial("x1^2 + x2^2 + 1"), alpha_start_override=1, alpha_cutoff=50)
    assert report.status == 'exhausted'
    assert report.witness is None


def test_semi_refuses_unmaterialized_start():
    """Without an override the start 2^(2^8)+1 is past the cutoff"""
    report = semi_algorithm_infinite(parse_polynomial("x1 - 1"))
    assert report.status == 'refused'
    assert report.start == "2^(2^8)+1"
    assert report.to_jsonable()["solutions"] == []


def test_semi_small_bound_runs_without_override():
    """A constant polynomial has bound 16 and no zeros"""
    report = semi_algorithm_infinite(parse_polynomial("1"), alpha_cutoff=20)
    assert report.status == 'exhausted'
    assert report.start == "2^(2^2)+1"


def test_semi_nonneg_shells():
    """The non-negative loop only visits y >= 0"""
    report = semi_algorithm_infinite(parse_polynomial("x1 + x2 - 4", 2), alpha_start_override=1,
                                     alpha_cutoff=5, nonneg=True)
    assert report.status == 'terminated'
    assert report.shell == 2
    assert report.solutions == [(2, 2)]
    assert report.nonneg


def test_semi_rejects_cutoff_below_start():
    """cutoff < start is a ValueError"""
    with pytest.raises(ValueError):
        semi_algorithm_infinite(parse_equation("x1 = 1").normalized, alpha_start_override=5, alpha_cutoff=3)

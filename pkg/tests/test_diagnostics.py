import pytest

from core.config import SUITES
from core.errors import InputError
from models import WalkParams
from services.diagnostics import SUITE_RUNNERS, run_suite


def test_every_suite_has_a_runner():
    assert set(SUITE_RUNNERS) == set(SUITES)


@pytest.mark.parametrize("name", ["table", "aperiodicity", "eigenfunction", "boundary", "lemma44"])
def test_rank_two_suites_pass(a2, run, name):
    report = run_suite(name, a2, run)
    assert report.suite == name
    assert report.passed, [check for check in report.checks if not check.passed]


def test_identities_rank_two(a2, run):
    report = run_suite("identities", a2, run)
    assert report.passed
    assert {"ProductFormulaAr", "WeylDenominator"} <= {i.name for i in report.identities}


def test_harnack_suite_measures_a_positive_minimum(a2, run):
    check = run_suite("harnack", a2, run).checks[0]
    assert check.measured["min_ratio"] > 0
    assert check.measured["half_min_ratio"] >= check.measured["min_ratio"]


def test_table_suite_weighted(weighted, run):
    report = run_suite("table", weighted, run)
    assert report.passed
    assert [check.name for check in report.checks] == ["row-sums"]


def test_tree_suites(tree, run):
    for name in ("table", "aperiodicity", "eigenfunction"):
        assert run_suite(name, tree, run).passed, name


@pytest.mark.parametrize("q", [2, 3])
def test_f0_is_an_eigenfunction_over_the_ball(q, run):
    check = run_suite("eigenfunction", WalkParams.distinguished(2, q), run).checks[0]
    assert check.passed, check.witness
    assert check.measured["max_relative"] <= 1e-9


def test_boundary_suite_requires_rank_two(tree, run):
    with pytest.raises(InputError):
        run_suite("boundary", tree, run)


def test_unknown_suite(a2, run):
    with pytest.raises(InputError):
        run_suite("unknown", a2, run)


@pytest.mark.slow
@pytest.mark.parametrize("name", ["lemma34", "global-psi", "plancherel"])
def test_numeric_suites(a2, run, name):
    assert run_suite(name, a2, run).passed

import math
from fractions import Fraction

import pytest

from core.errors import DomainError, InputError, ResourceError, UnsupportedError
from models import WalkParams
from services.diagnostics import distinguished_table
from services.radial_dp import (
    build_table, choice_count, common_denominator, density_dp, dp_history, dp_run,
    enumerate_paths, harnack_profile, iter_path_counts, log_choice_count, path_count,
    path_count_band, region_of,
)


@pytest.mark.parametrize("q", [2, 3, 4])
def test_distinguished_table(q):
    table = build_table(WalkParams.distinguished(2, q))
    assert table.entries == distinguished_table(q)
    for row in table.entries.values():
        assert sum(row.values()) == 1


def test_weighted_table_rows_sum_to_one(weighted):
    table = build_table(weighted)
    assert set(table.entries) == {"interior", "wall-1", "wall-2", "origin"}
    for row in table.entries.values():
        assert sum(row.values()) == 1
    assert table.entries["origin"] == {(1, 0): Fraction(1, 3), (0, 1): Fraction(2, 3)}


def test_tree_table(tree):
    table = build_table(tree)
    assert table.entries["origin"] == {(1,): 1}
    assert table.entries["interior"] == {(1,): Fraction(2, 3), (-1,): Fraction(1, 3)}


def test_common_denominator(a2):
    assert common_denominator(build_table(a2)) == 14


def test_table_unsupported_in_rank_three(a3):
    with pytest.raises(UnsupportedError):
        build_table(a3)


def test_region_of():
    assert region_of((3, 2)) == "interior"
    assert region_of((3, 0)) == "wall-1"
    assert region_of((0, 2)) == "wall-2"
    assert region_of((0, 0)) == "origin"
    assert region_of((4,)) == "interior"


def test_small_time_densities(a2):
    assert density_dp(a2, 1, (1, 0)) == Fraction(1, 14)
    assert density_dp(a2, 2, (0, 0)) == Fraction(1, 14)
    assert dp_run(a2, 3).mass((1, 1)) == Fraction(15, 98)
    assert density_dp(a2, 3, (1, 1)) == Fraction(15, 98 * 42)


def test_tree_densities(tree):
    assert density_dp(tree, 2, (0,)) == Fraction(1, 3)
    assert density_dp(tree, 3, (3,)) == Fraction(1, 27)
    assert density_dp(tree, 3, (2,)) == 0


def test_mass_is_conserved(a2, weighted):
    for p in (a2, weighted):
        for dist in dp_history(p, 15):
            assert dist.total() == 1


def test_history_matches_single_run(a2):
    history = dp_run(a2, 6, history=True)
    assert len(history) == 7
    assert history[-1].mass((2, 1)) == dp_run(a2, 6).mass((2, 1))


def test_log_mass_of_unreachable_weight(a2):
    dist = dp_run(a2, 4)
    assert dist.log_mass((4, 1)) == -math.inf
    assert dist.mass((9, 9)) == 0
    assert dist.log_mass((2, 1)) == pytest.approx(math.log(float(dist.mass((2, 1)))))


def test_density_rejects_non_dominant(a2):
    with pytest.raises(InputError):
        density_dp(a2, 2, (-1, 1))


def test_negative_steps(a2):
    with pytest.raises(DomainError):
        dp_run(a2, -1)


def test_step_guard(a2):
    with pytest.raises(ResourceError):
        dp_run(a2, 10 ** 6)


def test_path_counts():
    assert path_count(2, (0, 0)) == 2
    assert path_count(3, (1, 1)) == 4
    assert choice_count(3, (1, 1)) == 2
    assert log_choice_count(3, (1, 1)) == pytest.approx(math.log(2))
    with pytest.raises(DomainError):
        path_count(2, (2, 1))


def test_choice_count_is_a_lower_bound():
    for n, x in [(5, (3, 1)), (6, (4, 0)), (7, (3, 2)), (8, (5, 2))]:
        assert 0 < choice_count(n, x) <= path_count(n, x)


def test_enumeration_oracle_agrees_with_dp(a2):
    count, mass = enumerate_paths(a2, 3, (1, 1))
    assert count == 4
    assert mass == Fraction(15, 98)
    for n, x in [(4, (2, 0)), (5, (1, 1)), (6, (0, 0))]:
        assert enumerate_paths(a2, n, x)[1] == dp_run(a2, n).mass(x)


def test_enumeration_limit(a2):
    with pytest.raises(ResourceError):
        enumerate_paths(a2, 13, (1, 0))


def test_iter_path_counts_agrees_with_path_count():
    counts = dict(iter_path_counts(7, 7))
    for x in [(3, 1), (2, 2), (0, 1), (7, 0)]:
        assert counts[7].get(x, 0) == path_count(7, x)


def test_path_count_band_is_bounded():
    band = path_count_band(30, 3)
    assert 0 < band["min"] <= band["max"]
    assert band["ratio"] >= 1
    assert band["witness_min"][0] <= 30


def test_harnack_profile_is_positive(a2):
    profile = harnack_profile(a2, 12)
    assert [row["n"] for row in profile] == list(range(2, 13))
    assert all(row["min_ratio"] > 0 for row in profile)


@pytest.mark.slow
def test_mass_is_conserved_for_long_runs(a2):
    dist = dp_run(a2, 400)
    assert dist.total() == 1
    assert density_dp(a2, 400, (0, 0)) > 0

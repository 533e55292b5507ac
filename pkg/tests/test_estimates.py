import math

import pytest

from core.errors import DomainError, InputError, RegimeError
from services.estimates import (
    certify_sweep, estimate, estimate_rank1, estimate_rank2, estimate_rank2_boundary,
    estimate_rankr, estimate_weighted, local_limit_profile, measure_weighted_C,
    upper_bound_rankr, upper_tilde_rankr,
)


@pytest.mark.parametrize("x, regime", [
    ((5, 5), "interior"), ((12, 12), "near-boundary"), ((20, 10), "boundary"), ((0, 0), "interior"),
])
def test_rank_two_regimes(a2, x, regime):
    value = estimate_rank2(a2, 30, x)
    assert value.regime == regime
    assert value.log_value == pytest.approx(math.fsum(value.components.values()))


def test_spherical_variant(a2):
    envelope = estimate_rank2(a2, 40, (6, 3))
    spherical = estimate_rank2(a2, 40, (6, 3), variant="spherical")
    assert spherical.regime == "interior-spherical"
    assert math.isfinite(spherical.log_value)
    assert spherical.components["sigma_n"] == envelope.components["sigma_n"]


def test_rank_two_rejects_bad_input(a2):
    with pytest.raises(DomainError):
        estimate_rank2(a2, 5, (4, 2))
    with pytest.raises(InputError):
        estimate_rank2(a2, 5, (1, 1), variant="other")


def test_boundary_form_matches_main_estimate_on_the_boundary(a2):
    assert estimate_rank2_boundary(a2, 12, (8, 4)).log_value == pytest.approx(
        estimate_rank2(a2, 12, (8, 4)).log_value
    )


def test_rank_one(tree):
    assert estimate_rank1(tree, 5, 2).log_value == -math.inf
    assert estimate_rank1(tree, 5, 2).regime == "parity"
    assert estimate_rank1(tree, 6, 6).regime == "boundary"
    assert estimate(tree, 6, (2,)).regime == "interior"
    with pytest.raises(DomainError):
        estimate_rank1(tree, 3, 5)


def test_rank_r_regimes(a3):
    assert estimate_rankr(a3, 20, (2, 1, 1)).regime == "interior"
    with pytest.raises(RegimeError):
        estimate_rankr(a3, 10, (5, 3, 1))
    assert estimate(a3, 10, (5, 3, 1)).regime == "upper-only"


def test_upper_bound_dominates_estimate(a3):
    interior = estimate_rankr(a3, 20, (2, 1, 1))
    upper = upper_bound_rankr(a3, 20, (2, 1, 1))
    assert upper.log_value >= interior.log_value
    assert upper_tilde_rankr(a3, 20, (2, 1, 1)).log_value > upper.log_value


def test_weighted_regimes(weighted):
    assert estimate(weighted, 30, (4, 4)).regime == "interior"
    assert estimate_weighted(weighted, 30, (15, 12)).regime == "upper-only"
    with pytest.raises(RegimeError):
        estimate_weighted(weighted, 10, (6, 4))


def test_interior_sweep_band(a2):
    band, rows = certify_sweep(a2, "rank2-interior", 20)
    assert band.count == len(rows) > 0
    assert 0 < band.c_min <= band.c_max
    assert band.ratio < 1e3
    assert band.witness_min[0] <= 20
    assert all(row.regime == "interior" for row in rows)


def test_boundary_sweep_band(a2):
    band, rows = certify_sweep(a2, "rank2-boundary", 24, m=3)
    assert all(row.d <= 3 for row in rows)
    assert 0 < band.c_min <= band.c_max


def test_rank_one_sweep_band(tree):
    band, _ = certify_sweep(tree, "rank1", 40)
    assert band.ratio < 1e3
    assert band.widening is not None


def test_sweep_threads_give_the_same_rows(a2):
    _, serial = certify_sweep(a2, "rank2-full", 10)
    _, threaded = certify_sweep(a2, "rank2-full", 10, threads=4)
    assert [row.x for row in serial] == [row.x for row in threaded]


def test_empty_sweep(a2):
    band, rows = certify_sweep(a2, "rank2-interior", 1)
    assert rows == []
    assert band.count == 0
    assert band.c_min is None


def test_sweep_region_checks(a2, tree):
    with pytest.raises(InputError):
        certify_sweep(tree, "rank2-interior", 10)
    with pytest.raises(InputError):
        certify_sweep(a2, "weighted-upper", 10)
    with pytest.raises(InputError):
        certify_sweep(a2, "nowhere", 10)


def test_weighted_constant_is_nonnegative(weighted):
    assert measure_weighted_C(weighted, 16) >= 0


def test_local_limit_profile_grows_towards_its_limit(a2):
    profile = local_limit_profile(a2, [20, 40, 80])
    assert set(profile) == {20, 40, 80}
    assert all(value > 0 for value in profile.values())
    assert profile[80] > profile[40]


@pytest.mark.slow
def test_local_limit_profile_flattens_between_doublings(a2):
    # 880, 1359, 1784 : l'écart de 20 % n'est pas encore atteint à n = 400
    profile = local_limit_profile(a2, [100, 200, 400])
    first = math.log(profile[200] / profile[100])
    second = math.log(profile[400] / profile[200])
    assert 0 < second < first


@pytest.mark.slow
def test_full_rank_two_band_acceptance(a2):
    band, rows = certify_sweep(a2, "rank2-full", 120, threads=4)
    assert max(row.n for row in rows) == 120
    assert 0 < band.c_min <= band.c_max
    assert band.ratio < 50
    assert band.widening is not None
    assert band.widening < 0.10


@pytest.mark.slow
def test_rank_three_interior_acceptance(a3):
    band, rows = certify_sweep(a3, "rankr-interior", 24)
    assert {row.n for row in rows} == {12, 18, 24}
    assert 0 < band.c_min <= band.c_max
    assert band.ratio < 100
    # une seule constante K pour toute la région
    K = max(math.exp(row.log_p_oracle - upper_bound_rankr(a3, row.n, row.x).log_value) for row in rows)
    assert 0 < K <= band.c_max * (1 + 1e-9)

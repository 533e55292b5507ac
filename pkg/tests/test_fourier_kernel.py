import math

import pytest

from core.config import QuadratureConfig
from core.errors import InputError, UnsupportedError
from models import WalkParams
from services.fourier_kernel import (
    contour_calibration, density_contour, density_fourier_all,
    density_fourier_region, density_plancherel, grid_offsets, integrand_periodicity,
)
from services.radial_dp import density_dp


def _log_dp(p, n, x):
    value = density_dp(p, n, x)
    return math.log(value.numerator) - math.log(value.denominator)


@pytest.mark.parametrize("rank", [1, 2, 3])
@pytest.mark.parametrize("q", [2, 3])
def test_normalization(rank, q):
    p = WalkParams.distinguished(rank, q)
    assert density_contour(p, 0, (0,) * rank).log_value == pytest.approx(0, abs=1e-7)
    assert contour_calibration(rank, q) == pytest.approx(1, abs=1e-7)


@pytest.mark.parametrize("rank", [1, 2])
def test_raw_normalization(rank):
    p = WalkParams.distinguished(rank, 2)
    assert density_plancherel(p, 0, (0,) * rank).log_value == pytest.approx(0, abs=1e-7)


@pytest.mark.parametrize("n, x", [(1, (1, 0)), (2, (0, 0)), (3, (1, 1)), (5, (2, 0)), (6, (1, 1)), (8, (3, 2))])
def test_contour_agrees_with_dp(a2, n, x):
    assert density_contour(a2, n, x).log_value == pytest.approx(_log_dp(a2, n, x), abs=1e-6)


@pytest.mark.parametrize("n, x", [(2, (0, 0)), (3, (1, 1)), (4, (2, 1))])
def test_raw_form_agrees_with_dp(a2, n, x):
    assert density_plancherel(a2, n, x).log_value == pytest.approx(_log_dp(a2, n, x), abs=1e-6)


def test_contour_agrees_with_dp_weighted(weighted):
    for n, x in [(2, (0, 0)), (4, (1, 0)), (5, (2, 1))]:
        assert density_contour(weighted, n, x).log_value == pytest.approx(_log_dp(weighted, n, x), abs=1e-6)


def test_tree(tree):
    assert density_contour(tree, 2, (0,)).log_value == pytest.approx(math.log(1 / 3), abs=1e-8)
    assert density_contour(tree, 3, (3,)).log_value == pytest.approx(math.log(1 / 27), abs=1e-8)


def test_parity_gives_exact_zero(tree, a2):
    assert density_contour(tree, 3, (2,)).log_value == -math.inf
    assert density_plancherel(a2, 1, (0, 0)).log_value == -math.inf


def test_shifted_contour_far_from_origin(a2):
    cfg = QuadratureConfig(shift=True)
    n, x = 30, (14, 6)
    result = density_contour(a2, n, x, cfg)
    assert result.shifted
    assert result.log_value == pytest.approx(_log_dp(a2, n, x), abs=1e-6)


def test_fft_agrees_with_dp(a2):
    n = 8
    table = density_fourier_all(a2, n)
    for x, value in table.items():
        if sum(x) > 4:
            continue
        if value.log_value == -math.inf:
            assert density_dp(a2, n, x) == 0
        else:
            assert value.log_value == pytest.approx(_log_dp(a2, n, x), abs=1e-6)


def test_region_groups_cover_requested_weights(a2):
    weights = [(4, 2), (6, 2), (2, 6), (10, 0)]
    results = density_fourier_region(a2, 20, weights)
    assert set(results) == set(weights)
    for x in weights:
        assert results[x].log_value == pytest.approx(_log_dp(a2, 20, x), abs=1e-6)


def test_periodicity(a2, a3):
    assert integrand_periodicity(a2, 5, (2, 1)) <= 1e-9
    assert integrand_periodicity(a3, 4, (1, 0, 1)) <= 1e-9


def test_grid_offsets_avoid_integers():
    offsets = grid_offsets(4)
    assert ((offsets > 0) & (offsets < 1)).all()


def test_rejects_bad_requests(a2):
    with pytest.raises(InputError):
        density_contour(a2, 3, (1,))
    with pytest.raises(InputError):
        density_contour(a2, -1, (0, 0))
    with pytest.raises(UnsupportedError):
        density_contour(WalkParams.distinguished(5, 2), 1, (1, 0, 0, 0, 0))

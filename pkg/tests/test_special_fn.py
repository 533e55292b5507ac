import math
from fractions import Fraction

import numpy as np
import pytest

from core.errors import InputError, PoleError
from models import WalkParams
from services.radial_dp import dp_history
from services.root_system import AmbientVector
from services.special_fn import (
    F0, F0_estimate, b_eval, c_function, delta_eval, f0_rank1, h_at_zero, h_eval,
    macdonald_P, n_lambda, plancherel_density, poincare_polynomial, reachable,
    sigma, sigma_exact, sphere_probabilities, sphere_probabilities_exact, spectral_radius,
    spectral_radius_exact,
)


def test_h_at_origin(a2, a3, tree):
    assert h_eval(AmbientVector.from_weight_coords([0.0, 0.0]), a2).real == pytest.approx(6)
    assert h_at_zero(a3) == 14
    assert h_at_zero(tree) == 2


def test_h_is_weyl_invariant(a2):
    z = AmbientVector.from_root_coords([0.3 + 0.2j, -0.1 + 0.5j])
    value = h_eval(z, a2)
    swapped = AmbientVector(z.coords[::-1].copy())
    assert abs(h_eval(swapped, a2) - value) < 1e-12 * abs(value)


def test_delta_and_b_at_generic_point():
    z = AmbientVector.from_weight_coords([0.4, 0.7])
    assert abs(delta_eval(z)) > 0
    assert b_eval(z, 2).real == pytest.approx(
        np.prod([1 - math.exp(-a) / 2 for a in (0.4, 0.7, 1.1)])
    )


def test_c_function_pole(a2):
    with pytest.raises(PoleError):
        c_function(AmbientVector.from_weight_coords([0.0, 0.5]), a2)


def test_c_function_tends_to_one_deep_in_the_chamber(a2):
    assert abs(c_function(AmbientVector.from_weight_coords([20.0, 20.0]), a2) - 1) < 1e-8


def test_plancherel_density_is_periodic_and_nonnegative(a2):
    theta = AmbientVector.from_root_coords([0.7, 1.9])
    shifted = AmbientVector.from_root_coords([0.7 + 2 * np.pi, 1.9])
    assert plancherel_density(theta, a2) >= 0
    assert plancherel_density(shifted, a2) == pytest.approx(plancherel_density(theta, a2))


def test_plancherel_density_vanishes_on_walls(a2_q3):
    assert plancherel_density(AmbientVector.from_weight_coords([0.0, 1.3]), a2_q3) == pytest.approx(0.0, abs=1e-24)


@pytest.mark.parametrize("weight, q, size", [
    ((1, 0), 2, 7), ((0, 1), 2, 7), ((1, 1), 2, 42), ((0, 0), 2, 1), ((1, 0), 3, 13),
])
def test_sphere_sizes_rank_two(weight, q, size):
    assert n_lambda(weight, WalkParams.distinguished(2, q)) == size


@pytest.mark.parametrize("k, size", [(0, 1), (1, 3), (2, 6), (3, 12)])
def test_sphere_sizes_tree(tree, k, size):
    assert n_lambda((k,), tree) == size


def test_sphere_size_rejects_wrong_rank(a2):
    with pytest.raises(InputError):
        n_lambda((1, 0, 0), a2)


def test_poincare_polynomial():
    assert poincare_polynomial(2, 2) == 1 + Fraction(2, 2) + Fraction(2, 4) + Fraction(1, 8)


def test_sigma_values(a2, tree):
    assert sigma_exact(a2) == Fraction(1, 7)
    assert spectral_radius(a2) == pytest.approx(6 / 7)
    assert sigma_exact(tree) is None
    assert spectral_radius(tree) == pytest.approx(2 * math.sqrt(2) / 3)
    assert sigma(tree) == pytest.approx(math.sqrt(2) / 3)
    assert spectral_radius_exact(a2) == Fraction(6, 7)
    assert spectral_radius_exact(tree) is None


def test_sphere_probabilities(a2, tree, weighted):
    assert sphere_probabilities_exact(a2) == (Fraction(1, 2), Fraction(1, 2))
    assert sphere_probabilities_exact(weighted) == (Fraction(1, 3), Fraction(2, 3))
    assert sphere_probabilities(a2) == pytest.approx((0.5, 0.5))
    assert sphere_probabilities(tree) == pytest.approx((1.0,))


def test_macdonald_p0_is_one(a2):
    z = AmbientVector.from_weight_coords([0.31, 0.57])
    assert abs(macdonald_P((0, 0), z, a2) - 1) < 1e-9


def test_macdonald_p_on_wall(a2):
    with pytest.raises(PoleError):
        macdonald_P((1, 0), AmbientVector.from_weight_coords([0.0, 0.0]), a2)


@pytest.mark.parametrize("q", [2, 3, 5])
@pytest.mark.parametrize("k", range(0, 6))
def test_f0_rank_one_closed_form(q, k):
    assert F0((k,), WalkParams.distinguished(1, q)) == pytest.approx(f0_rank1(k, q), rel=1e-8)


def test_f0_at_origin(a2, a3):
    assert F0((0, 0), a2) == pytest.approx(1, rel=1e-8)
    assert F0((0, 0, 0), a3) == pytest.approx(1, rel=1e-8)


def test_f0_symmetry(a2):
    assert F0((3, 1), a2) == pytest.approx(F0((1, 3), a2), rel=1e-10)


# q = 2 mesure 28.6, q = 3 mesure 10.5
@pytest.mark.parametrize("q, bound", [(2, 30), (3, 20)])
def test_f0_envelope_band_over_the_box(q, bound):
    p = WalkParams.distinguished(2, q)
    ratios = [F0((a, b), p) / F0_estimate((a, b), p) for a in range(31) for b in range(31 - a)]
    assert min(ratios) > 0
    assert max(ratios) / min(ratios) < bound


@pytest.mark.slow
def test_ratio_of_densities_approaches_f0(a2):
    errors = {}
    for dist in dp_history(a2, 400):
        if dist.n not in (100, 400):
            continue
        origin = dist.mass((0, 0))
        errors[dist.n] = max(
            abs(float(dist.mass((a, b)) / (n_lambda((a, b), a2) * origin)) / F0((a, b), a2) - 1)
            for a in range(5) for b in range(5 - a)
        )
    # 8.2e-2 mesuré à n = 400 : convergence lente, voir DESIGN.md
    assert errors[400] < errors[100]
    assert errors[400] < 0.1


def test_f0_rejects_non_dominant(a2):
    with pytest.raises(InputError):
        F0((-1, 0), a2)


@pytest.mark.parametrize("rank, n, weight, expected", [
    (1, 3, (2,), False),
    (1, 4, (2,), True),
    (2, 0, (0, 0), True),
    (2, 1, (0, 0), False),
    (2, 1, (1, 0), True),
    (2, 2, (0, 0), True),
    (2, 3, (2, 2), False),
    (3, 1, (0, 1, 0), True),
])
def test_reachable(rank, n, weight, expected):
    assert reachable(rank, n, weight) is expected

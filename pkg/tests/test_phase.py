import math

import numpy as np
import pytest
from scipy import linalg

from core.errors import DomainError, InputError
from services.phase import (
    PhaseProblem, check_blowup, check_lemma34, check_lemma44, check_ray_monotonicity,
    dphi_check, global_psi_check, hessian_B, lemma36_band, phi_batch, phi_rank1,
    random_deltas, solve_stationary, varpi,
)


def test_closed_form_stationary_point(a2):
    solution = solve_stationary(PhaseProblem(a2, (3 / 14, 3 / 14)))
    assert solution.s_root == pytest.approx((math.log(2), math.log(2)), abs=1e-10)
    assert solution.phi == pytest.approx(math.log(7 / 6) - 3 / 7 * math.log(2), abs=1e-12)
    assert solution.phi == pytest.approx(-0.14291, abs=1e-5)
    assert solution.h_value == pytest.approx(7)


def test_origin_is_its_own_stationary_point(a2):
    solution = solve_stationary(PhaseProblem(a2, (0.0, 0.0)))
    assert solution.s_root == pytest.approx((0.0, 0.0), abs=1e-12)
    assert solution.phi == pytest.approx(0.0, abs=1e-14)


@pytest.mark.parametrize("delta", [0.0, 0.2, 0.5, 0.9, 0.999])
def test_rank_one_closed_form(tree, delta):
    assert solve_stationary(PhaseProblem(tree, (delta,))).phi == pytest.approx(phi_rank1(delta), abs=1e-10)


def test_phi_rank1_endpoint():
    assert phi_rank1(1.0) == pytest.approx(-math.log(2))
    with pytest.raises(DomainError):
        phi_rank1(1.5)


def test_residuals_on_random_points(a2, a3):
    for p in (a2, a3):
        for delta in random_deltas(p.rank, 50, seed=7):
            assert solve_stationary(PhaseProblem(p, tuple(delta))).grad_residual <= 1e-12


def test_dphi_equals_minus_s(a2):
    for delta in random_deltas(2, 5, seed=3, max_length=0.9):
        assert dphi_check(PhaseProblem(a2, tuple(delta))) <= 1e-5


@pytest.mark.parametrize("delta", [(0.5, 0.6), (1.0, 0.0), (-0.1, 0.2)])
def test_outside_domain(a2, delta):
    with pytest.raises(DomainError):
        PhaseProblem(a2, delta)


def test_wrong_dimension(a2):
    with pytest.raises(InputError):
        PhaseProblem(a2, (0.1,))


def test_from_position(a2, tree):
    assert PhaseProblem.from_position(a2, 10, (3, 1)).delta == pytest.approx((4 / 12, 2 / 12))
    assert PhaseProblem.from_position(tree, 9, (4,)).delta == pytest.approx((0.5,))
    with pytest.raises(DomainError):
        PhaseProblem.from_position(a2, 3, (3, 1))


def test_hessian_is_positive_definite(a2, a3):
    linalg.cholesky(hessian_B([0.5, 2.0], a2))
    linalg.cholesky(hessian_B([1.0, 0.0, 3.0], a3))


def test_batch_agrees_with_single_solves(a2):
    deltas = random_deltas(2, 20, seed=11)
    phis, zetas = phi_batch(a2, deltas)
    for delta, phi, zeta in zip(deltas, phis, zetas):
        single = solve_stationary(PhaseProblem(a2, tuple(delta)))
        assert phi == pytest.approx(single.phi, abs=1e-10)
        assert zeta == pytest.approx(single.s_root, abs=1e-7)


def test_batch_rejects_boundary(a2):
    with pytest.raises(DomainError):
        phi_batch(a2, np.array([[0.5, 0.5]]))


def test_hessian_band_is_two_sided(a2):
    for s in ([0.0, 0.0], [4.0, 1.0], [1.0, 6.0]):
        low, high = lemma36_band(s, a2)
        assert 0 < low <= high < math.inf


def test_varpi_at_origin():
    assert varpi([0.0, 0.0, 0.0]) == pytest.approx(8)


def test_stationary_point_properties(a2):
    deltas = random_deltas(2, 100, seed=5)
    deltas[0] = (0.0, 0.4)
    deltas[1] = (0.3, 0.3)
    for result in check_lemma34(a2, deltas):
        assert result.passed, (result.name, result.witness)
    assert check_lemma44(a2, deltas).passed


def test_phi_monotone_along_rays(a2, a3):
    assert check_ray_monotonicity(a2, np.array([[1.0, 0.0], [1.0, 1.0], [1.0, 3.0]]), steps=10).passed
    assert check_ray_monotonicity(a3, np.array([[1.0, 1.0, 1.0]]), steps=8).passed


def test_stationary_point_escapes_near_the_boundary(a2):
    assert check_blowup(a2, [1.0, 1.0]).passed


def test_global_phase_positivity_small_grid(a2):
    result = global_psi_check(a2, [0.0, 2.0, 5.0], points=31)
    assert result.passed
    assert result.measured["min_ratio"] > 0


def test_newton_finishes_where_armijo_cannot_resolve_the_decrease(a2):
    problem = PhaseProblem.from_position(a2, 75, (7, 0))
    assert problem.delta == pytest.approx((8 / 77, 1 / 77))
    solution = solve_stationary(problem)
    assert solution.grad_residual <= 1e-10
    phis, _ = phi_batch(a2, np.array([problem.delta]))
    assert phis[0] == pytest.approx(solution.phi, abs=1e-10)


def test_batch_covers_every_cell_of_one_time(a2):
    n = 75
    deltas = np.array([
        PhaseProblem.from_position(a2, n, (a, b)).delta
        for a in range(n) for b in range(n - a)
    ])
    phis, _ = phi_batch(a2, deltas)
    assert np.all(np.isfinite(phis))
    assert np.all(phis <= 0)


@pytest.mark.slow
def test_batch_covers_every_cell_up_to_the_acceptance_horizon(a2):
    for n in range(2, 121):
        deltas = np.array([
            PhaseProblem.from_position(a2, n, (a, b)).delta
            for a in range(n) for b in range(n - a)
        ])
        phis, _ = phi_batch(a2, deltas)
        assert np.all(np.isfinite(phis)), n

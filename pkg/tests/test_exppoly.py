from fractions import Fraction

import pytest

from core.errors import InputError
from services.exppoly import (
    ExpPoly, alternating_denominator, dn_coefficient, dn_growth, h_poly, orbit_sum,
    solve_differentiation_coefficients, verify_identity, weyl_denominator,
)


def test_arithmetic_drops_zero_terms():
    f = ExpPoly.monomial(2, (1, 0)) + 1
    assert len(f) == 2
    assert not (f - f)
    assert f * 2 == f + f


def test_directional_derivative_of_monomial():
    e = ExpPoly.monomial(2, (1, 0))
    # ⟨α₁, λ₁⟩ = 1 et ⟨α₂, λ₁⟩ = 0
    assert e.directional_derivative((2, -1)) == e
    assert not e.directional_derivative((-1, 2))


def test_pi_partial_of_invariant_is_skew():
    f = h_poly(2) ** 3
    assert f.is_invariant()
    assert f.pi_partial().is_skew()


def test_pi_partial_order_does_not_matter():
    f = h_poly(2) ** 2 * ExpPoly.monomial(2, (1, 2))
    assert f.pi_partial() == f.pi_partial(order=[2, 0, 1])


def test_orbit_sum_is_invariant():
    assert orbit_sum(3, (1, 0, 1)).is_invariant()


def test_exact_divide():
    delta = weyl_denominator(2)
    product = h_poly(2) * delta
    assert product.exact_divide(delta) == h_poly(2)
    assert (h_poly(2) + 1).exact_divide(delta) is None


def test_negative_power_rejected():
    with pytest.raises(InputError):
        h_poly(2) ** -1


@pytest.mark.parametrize("rank", [1, 2, 3, 4])
def test_weyl_denominator_identity(rank):
    assert weyl_denominator(rank) == alternating_denominator(rank)
    assert verify_identity("WeylDenominator", rank).passed


@pytest.mark.parametrize("rank", [1, 2, 3, 4])
def test_product_formula_all_ranks(rank):
    report = verify_identity("ProductFormulaAr", rank)
    assert report.passed, report.witness


@pytest.mark.parametrize("name", [
    "ProductFormulaA2", "CoshProductA2", "DifferentiationFormulaA2",
    "GeneralDifferentiationRankTwo", "ProductDiffTilde",
])
def test_rank_two_identities(name):
    report = verify_identity(name, 2)
    assert report.passed, report.witness
    assert report.cases_checked >= 1


def test_product_formula_value_at_origin():
    # h(0) + 2 = 8 en rang 2
    assert verify_identity("ProductFormulaA2").detail == "h(0)+2 = 8"


@pytest.mark.parametrize("n", range(0, 6))
def test_d_n_closed_form_rank_two(n):
    assert dn_coefficient(2, n) == (n + 2) ** 2 * (n + 1)


def test_differentiation_formula_2_reports_d_n():
    report = verify_identity("DifferentiationFormula2Ar", 2, ns=range(0, 9))
    assert report.passed
    assert report.coefficients["3"] == str(25 * 4)


def test_d_n_growth_exponent_rank_two():
    growth = dn_growth(2, [20, 40, 80, 160])
    assert growth["exponent"] == pytest.approx(3, abs=0.2)


@pytest.mark.parametrize("n", range(0, 6))
def test_remainder_coefficient_rank_two(n):
    coefficients, message = solve_differentiation_coefficients(2, n)
    assert coefficients == {2: 2}, message


def test_differentiation_formula_1_rank_three():
    report = verify_identity("DifferentiationFormula1Ar", 3, ns=range(0, 4))
    assert report.passed, report.detail
    for values in report.coefficients.values():
        assert len(values) == 3


def test_unknown_identity():
    with pytest.raises(InputError):
        verify_identity("NoSuchIdentity")


def test_rank_two_identity_in_rank_three():
    with pytest.raises(InputError):
        verify_identity("ProductFormulaA2", 3)


def test_negative_n_rejected():
    with pytest.raises(InputError):
        verify_identity("DifferentiationFormulaA2", 2, ns=[-1])


def test_monomial_with_half_weight():
    half = Fraction(1, 2)
    e = ExpPoly.monomial(2, (half, 0))
    assert e * e == ExpPoly.monomial(2, (1, 0))

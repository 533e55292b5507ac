from fractions import Fraction

import numpy as np
import pytest

from core.errors import InputError
from services.root_system import AmbientVector, pairing, pi_poly, root_system, weyl_orbit


def test_cartan_and_gram_are_inverse():
    for rank in range(1, 5):
        system = root_system(rank)
        gram = np.array([[float(v) for v in row] for row in system.gram])
        assert np.allclose(system.cartan @ gram, np.eye(rank))


def test_weyl_group_order_and_signs():
    system = root_system(3)
    assert system.order == 24
    assert sum(w.det for w in system.weyl_group) == 0
    assert max(w.length for w in system.weyl_group) == system.num_positive


def test_weyl_element_inverse():
    for w in root_system(2).weyl_group:
        assert w.compose(w.inverse()).is_identity()


@pytest.mark.parametrize("weight, size", [((1, 0), 3), ((0, 1), 3), ((1, 1), 6), ((0, 0), 1), ((2, 0), 3)])
def test_orbit_sizes(weight, size):
    assert len(weyl_orbit(weight)) == size


def test_orbit_of_first_fundamental_weight():
    assert weyl_orbit((1, 0)) == {(1, 0), (-1, 1), (0, -1)}


def test_dominant_representative():
    system = root_system(2)
    assert system.dominant((-1, 1)) == (1, 0)
    assert system.dominant((-1, 2)) == (1, 1)
    assert system.dominant((0, -1)) == (1, 0)
    for mu in system.orbit((2, 1)):
        assert system.dominant(mu) == (2, 1)


@pytest.mark.parametrize("rank", [1, 2, 3, 4])
def test_rho_pairing(rank):
    system = root_system(rank)
    for j, weight in enumerate(system.fundamental_weights, start=1):
        assert system.rho_pairing(weight) == Fraction(j * (rank + 1 - j), 2)


def test_exact_pairing():
    assert pairing((1, 0), (1, 0)) == Fraction(2, 3)
    assert pairing((1, 0), (0, 1)) == Fraction(1, 3)
    assert pairing((2, -1), (1, 0)) == 1


def test_pairing_mixed_arguments():
    z = AmbientVector.from_weight_coords([0.5, 0.25])
    # ⟨λ₁, z⟩ est la première coordonnée de racines
    assert pairing(z, (1, 0)) == pytest.approx(z.root_coords()[0])


def test_pairing_rank_mismatch():
    with pytest.raises(InputError):
        pairing((1, 0), (1, 0, 0))


def test_pi_poly_on_lattice_and_ambient():
    assert pi_poly((1, 1)) == 2
    assert pi_poly((1, 0)) == 0
    z = AmbientVector.from_weight_coords([1.0, 1.0])
    assert pi_poly(z) == pytest.approx(2.0)


def test_pi_poly_is_skew():
    system = root_system(2)
    x = (3, 1)
    for w in system.weyl_group:
        assert pi_poly(w.act_weight(x)) == w.det * pi_poly(x)


def test_ambient_coordinate_conversions():
    z = AmbientVector.from_root_coords([0.3, -0.7, 1.1])
    back = AmbientVector.from_weight_coords(z.weight_coords())
    assert np.allclose(back.coords, z.coords)
    assert np.allclose(z.root_coords(), [0.3, -0.7, 1.1])


def test_ambient_vector_rejects_nonzero_sum():
    with pytest.raises(InputError):
        AmbientVector(np.array([1.0, 0.0, 0.0]))


def test_unsupported_rank():
    with pytest.raises(InputError):
        root_system(7)

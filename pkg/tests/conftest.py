"""Fixtures partagées de la suite de tests."""

from fractions import Fraction

import pytest

from core.config import RunConfig, config_manager
from models import WalkParams


@pytest.fixture
def a2():
    """Marche distinguée sur l'immeuble Ã₂ d'épaisseur 2."""
    return WalkParams.distinguished(2, 2)


@pytest.fixture
def a2_q3():
    return WalkParams.distinguished(2, 3)


@pytest.fixture
def tree():
    """Marche simple sur l'arbre homogène de valence 3."""
    return WalkParams.distinguished(1, 2)


@pytest.fixture
def a3():
    return WalkParams.distinguished(3, 2)


@pytest.fixture
def weighted():
    return WalkParams.weighted(2, Fraction(1, 3))


@pytest.fixture
def run():
    return RunConfig(nmax=20, m=4, seed=42)


@pytest.fixture(autouse=True)
def fresh_config():
    """La ligne de commande modifie la configuration globale : on la rétablit."""
    yield
    config_manager.config = config_manager._load_config()

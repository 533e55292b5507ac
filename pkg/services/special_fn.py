"""
Fonctions spéciales de l'immeuble Ã_r

Ce module évalue les fonctions h, Δ, b, c, la densité de Plancherel, les
polynômes de Macdonald P_λ, les cardinaux de sphères N_λ, les polynômes de
Poincaré et la fonction sphérique fondamentale F₀. Les préfacteurs
dépendant de q sont calculés en rationnels exacts et convertis en flottants
seulement à l'évaluation.
"""

import logging
from fractions import Fraction
from functools import lru_cache
from typing import List, Optional, Sequence, Tuple

import mpmath
import numpy as np

from core.config import SpecialFnConfig, config_manager
from core.errors import InputError, NumericError, PoleError
from models import DominantWeight, WalkParams
from services.root_system import AmbientVector, root_system


logger = logging.getLogger(__name__)

# Direction générique de régularisation : u = ρ + 0.318·λ₁
REGULARIZATION_SHIFT = 0.318


def _weight_tuple(weight) -> Tuple[int, ...]:
    if isinstance(weight, DominantWeight):
        return weight.x
    return tuple(int(v) for v in weight)


@lru_cache(maxsize=None)
def poincare_polynomial(rank: int, q: int, weight: Optional[Tuple[int, ...]] = None) -> Fraction:
    """
    Polynôme de Poincaré évalué en q⁻¹.

    Args:
        rank: rang r
        q: épaisseur
        weight: si fourni, la somme porte sur le stabilisateur W_λ

    Returns:
        Σ_w q^{−ℓ(w)} exact
    """
    system = root_system(rank)
    elements = system.weyl_group if weight is None else system.stabilizer(weight)
    return sum((Fraction(1, q ** w.length) for w in elements), Fraction(0))


@lru_cache(maxsize=None)
def sphere_size(weight: Tuple[int, ...], q: int) -> int:
    """N_λ = [W₀(q⁻¹)/W_λ(q⁻¹)]·q^{2⟨ρ,λ⟩}."""
    rank = len(weight)
    system = root_system(rank)
    twice_rho = 2 * system.rho_pairing(weight)
    value = poincare_polynomial(rank, q) / poincare_polynomial(rank, q, tuple(weight)) * Fraction(q) ** int(twice_rho)
    if value.denominator != 1:
        raise NumericError(f"sphere size {value} is not an integer")
    return int(value)


def n_lambda(weight, p: WalkParams) -> int:
    """
    Cardinal N_λ de la sphère V_λ(x).

    Args:
        weight: poids dominant
        p: paramètres de marche (seuls r et q interviennent)
    """
    x = _weight_tuple(weight)
    if len(x) != p.rank:
        raise InputError(f"weight {x} does not match rank {p.rank}")
    if any(v < 0 for v in x):
        raise InputError(f"weight {x} is not dominant")
    return sphere_size(x, p.q)


def _rho_pairings(rank: int) -> List[Fraction]:
    system = root_system(rank)
    return [system.rho_pairing(w) for w in system.fundamental_weights]


def sigma_exact(p: WalkParams) -> Optional[Fraction]:
    """σ exact lorsque tous les ⟨ρ,λ_j⟩ sont entiers (rang pair), None sinon."""
    pairings = _rho_pairings(p.rank)
    if any(v.denominator != 1 for v in pairings):
        return None
    total = Fraction(0)
    for weight, pairing in zip(root_system(p.rank).fundamental_weights, pairings):
        total += Fraction(sphere_size(weight, p.q), p.q ** int(pairing))
    return 1 / total


def sigma(p: WalkParams) -> float:
    """σ = 1/Σ_j N_{λ_j} q^{−⟨ρ,λ_j⟩}."""
    exact = sigma_exact(p)
    if exact is not None:
        return float(exact)
    total = 0.0
    for weight, pairing in zip(root_system(p.rank).fundamental_weights, _rho_pairings(p.rank)):
        total += sphere_size(weight, p.q) * p.q ** (-float(pairing))
    return 1.0 / total


def orbit_coefficients(p: WalkParams) -> Tuple[Fraction, ...]:
    """Poids des orbites fondamentales dans h (1 pour la marche distinguée, 2c_j sinon)."""
    if p.c is None:
        return tuple(Fraction(1) for _ in range(p.rank))
    return tuple(2 * c for c in p.c)


def h_at_zero(p: WalkParams) -> Fraction:
    system = root_system(p.rank)
    return sum(
        (a * len(system.orbit(w)) for a, w in zip(orbit_coefficients(p), system.fundamental_weights)),
        Fraction(0),
    )


def spectral_radius_exact(p: WalkParams) -> Optional[Fraction]:
    s = sigma_exact(p)
    return None if s is None else s * h_at_zero(p)


def spectral_radius(p: WalkParams) -> float:
    """Rayon spectral 𝝈 = σ·h(0)."""
    return sigma(p) * float(h_at_zero(p))


def sphere_probabilities(p: WalkParams) -> Tuple[float, ...]:
    """Probabilité de sauter dans la sphère V_{λ_j} en un pas."""
    if p.c is not None:
        return tuple(float(c) for c in p.c)
    s = sigma(p)
    return tuple(
        s * sphere_size(w, p.q) * p.q ** (-float(pairing))
        for w, pairing in zip(root_system(p.rank).fundamental_weights, _rho_pairings(p.rank))
    )


def sphere_probabilities_exact(p: WalkParams) -> Optional[Tuple[Fraction, ...]]:
    if p.c is not None:
        return tuple(p.c)
    s = sigma_exact(p)
    if s is None:
        return None
    return tuple(
        s * sphere_size(w, p.q) / p.q ** int(pairing)
        for w, pairing in zip(root_system(p.rank).fundamental_weights, _rho_pairings(p.rank))
    )


@lru_cache(maxsize=None)
def orbit_matrix(rank: int, coefficients: Tuple[Fraction, ...]) -> Tuple[np.ndarray, np.ndarray]:
    """Poids des orbites fondamentales (lignes) et coefficients correspondants."""
    system = root_system(rank)
    weights, coefs = [], []
    for a, w in zip(coefficients, system.fundamental_weights):
        for mu in sorted(system.orbit(w)):
            weights.append(mu)
            coefs.append(float(a))
    return np.array(weights, dtype=float), np.array(coefs)


def h_values(zeta: np.ndarray, p: WalkParams) -> np.ndarray:
    """
    h évalué sur un tableau de points en coordonnées de racines.

    Args:
        zeta: tableau (..., r) de z^j = ⟨λ_j, z⟩ (réel ou complexe)
        p: paramètres de marche

    Returns:
        Tableau (...) des valeurs de h
    """
    weights, coefs = orbit_matrix(p.rank, orbit_coefficients(p))
    return np.exp(np.asarray(zeta) @ weights.T) @ coefs


def h_eval(z: AmbientVector, p: WalkParams) -> complex:
    """h(z) = Σ_j a_j Σ_{λ∈W₀.λ_j} e^{⟨λ,z⟩}."""
    if z.rank != p.rank:
        raise InputError(f"rank mismatch: {z.rank} vs {p.rank}")
    return complex(h_values(z.root_coords()[None, :], p)[0])


@lru_cache(maxsize=None)
def root_matrix(rank: int) -> np.ndarray:
    """Racines positives en coordonnées de poids : ⟨α,z⟩ = α·ζ."""
    return np.array(root_system(rank).positive_roots, dtype=float)


def root_pairings(zeta: np.ndarray, rank: int) -> np.ndarray:
    return np.asarray(zeta) @ root_matrix(rank).T


def delta_eval(z: AmbientVector) -> complex:
    """Δ(z) = ∏_{α∈R⁺} 2 sinh(⟨α,z⟩/2)."""
    pairs = root_pairings(z.root_coords(), z.rank)
    return complex(np.prod(2 * np.sinh(pairs.astype(complex) / 2)))


def b_eval(z: AmbientVector, q: int) -> complex:
    """b(z) = ∏_{α∈R⁺} (1 − q⁻¹e^{−⟨α,z⟩})."""
    pairs = root_pairings(z.root_coords(), z.rank)
    return complex(np.prod(1 - np.exp(-pairs.astype(complex)) / q))


def _on_wall(pairs: np.ndarray, tol: float = 1e-12) -> bool:
    """Vrai si ⟨α,z⟩ ∈ 2πiℤ pour une racine."""
    pairs = np.asarray(pairs, dtype=complex)
    near_imag = np.abs(pairs.real) <= tol
    k = np.round(pairs.imag / (2 * np.pi))
    return bool(np.any(near_imag & (np.abs(pairs.imag - 2 * np.pi * k) <= tol)))


def c_function(z: AmbientVector, p: WalkParams) -> complex:
    """
    c(z) = ∏_{α∈R⁺} (1 − q⁻¹e^{−⟨α,z⟩}) / (1 − e^{−⟨α,z⟩}).

    Raises:
        PoleError: si z est sur un mur singulier
    """
    pairs = root_pairings(z.root_coords(), z.rank).astype(complex)
    if _on_wall(pairs):
        raise PoleError(f"c-function evaluated on a singular wall at {z}")
    e = np.exp(-pairs)
    return complex(np.prod((1 - e / p.q) / (1 - e)))


def inverse_c_values(zeta: np.ndarray, rank: int, q: int) -> np.ndarray:
    """1/c(z) sur un tableau de points (nul sur les murs)."""
    e = np.exp(-root_pairings(np.asarray(zeta, dtype=complex), rank))
    return np.prod((1 - e) / (1 - e / q), axis=-1)


def plancherel_values(theta_root: np.ndarray, rank: int, q: int) -> np.ndarray:
    """|c(iθ)|⁻² pour θ en coordonnées de racines (tableau (..., r))."""
    e = np.exp(-1j * root_pairings(np.asarray(theta_root, dtype=float), rank))
    return np.prod(np.abs(1 - e) ** 2 / np.abs(1 - e / q) ** 2, axis=-1)


def plancherel_density(theta: AmbientVector, p: WalkParams) -> float:
    """Densité de Plancherel |c(iθ)|⁻², prolongée par 0 sur les murs."""
    if theta.rank != p.rank:
        raise InputError(f"theta has rank {theta.rank}, walk has rank {p.rank}")
    return float(plancherel_values(theta.root_coords().real, p.rank, p.q))


@lru_cache(maxsize=None)
def symmetrization_data(rank: int, weight: Tuple[int, ...]) -> Tuple[np.ndarray, np.ndarray]:
    """
    Pour chaque w ∈ W₀ : w⁻¹λ et les w⁻¹α (α ∈ R⁺) en coordonnées de poids.

    ⟨λ, w·z⟩ = ⟨w⁻¹λ, z⟩ et c(w·z) = ∏ f(⟨w⁻¹α, z⟩).
    """
    system = root_system(rank)
    lambdas, roots = [], []
    for w in system.weyl_group:
        inverse = w.inverse()
        lambdas.append(inverse.act_weight(weight))
        roots.append([inverse.act_weight(alpha) for alpha in system.positive_roots])
    return np.array(lambdas, dtype=float), np.array(roots, dtype=float)


def _macdonald_prefactor(rank: int, q: int, weight: Tuple[int, ...]) -> float:
    pairing = root_system(rank).rho_pairing(weight)
    return float(1 / poincare_polynomial(rank, q)) * q ** (-float(pairing))


def macdonald_values(weight, zeta: np.ndarray, rank: int, q: int) -> np.ndarray:
    """
    P_λ sur un tableau de points complexes en coordonnées de racines.

    Args:
        weight: poids dominant λ
        zeta: tableau (..., r) hors des murs singuliers
        rank: rang r
        q: épaisseur
    """
    x = _weight_tuple(weight)
    lambdas, roots = symmetrization_data(rank, x)
    zeta = np.asarray(zeta, dtype=complex)
    total = np.zeros(zeta.shape[:-1], dtype=complex)
    for lam, alphas in zip(lambdas, roots):
        e = np.exp(-(zeta @ alphas.T))
        total += np.prod((1 - e / q) / (1 - e), axis=-1) * np.exp(zeta @ lam)
    return total * _macdonald_prefactor(rank, q, x)


def macdonald_P(weight, z: AmbientVector, p: WalkParams) -> complex:
    """
    Polynôme de Macdonald symétrique
    P_λ(z) = W₀(q⁻¹)⁻¹ q^{−⟨ρ,λ⟩} Σ_w c(w·z) e^{⟨λ,w·z⟩}.

    Raises:
        PoleError: si z est sur un mur singulier (utiliser F0 en 0)
    """
    if z.rank != p.rank:
        raise InputError(f"rank mismatch: {z.rank} vs {p.rank}")
    pairs = root_pairings(z.root_coords(), z.rank)
    if _on_wall(pairs):
        raise PoleError(f"Macdonald polynomial evaluated on a singular wall at {z}")
    return complex(macdonald_values(weight, z.root_coords()[None, :], p.rank, p.q)[0])


def _macdonald_mp(x: Tuple[int, ...], q: int, zeta: Sequence) -> mpmath.mpf:
    """P_λ en précision étendue en un point réel (coordonnées de racines)."""
    rank = len(x)
    lambdas, roots = symmetrization_data(rank, x)
    total = mpmath.mpf(0)
    q_inv = mpmath.mpf(1) / q
    for lam, alphas in zip(lambdas, roots):
        term = mpmath.exp(mpmath.fsum(int(a) * z for a, z in zip(lam, zeta)))
        for moved in alphas:
            e = mpmath.exp(-mpmath.fsum(int(a) * z for a, z in zip(moved, zeta)))
            term *= (1 - q_inv * e) / (1 - e)
        total += term
    volume = poincare_polynomial(rank, q)
    pairing = root_system(rank).rho_pairing(x)
    prefactor = mpmath.mpf(volume.denominator) / volume.numerator
    return total * prefactor * mpmath.power(q, -mpmath.mpf(pairing.numerator) / pairing.denominator)


def _regularization_direction(rank: int) -> List[float]:
    """u = ρ + 0.318·λ₁ en coordonnées de racines."""
    system = root_system(rank)
    weight = [1.0 + (REGULARIZATION_SHIFT if j == 0 else 0.0) for j in range(rank)]
    return [float(v) for v in (np.array(weight) @ system.gram_float)]


@lru_cache(maxsize=None)
def _f0_cached(x: Tuple[int, ...], q: int, cfg: SpecialFnConfig) -> float:
    rank = len(x)
    if not any(x):
        return 1.0
    system = root_system(rank)
    direction = _regularization_direction(rank)
    digits = cfg.extra_digits + 6 * system.num_positive

    with mpmath.workdps(digits):
        table: List[List[mpmath.mpf]] = []
        previous = None
        spread = None
        for level in range(cfg.max_levels):
            eps = mpmath.mpf(cfg.base_epsilon) / 2 ** level
            row = [_macdonald_mp(x, q, [eps * u for u in direction])]
            for j in range(1, level + 1):
                factor = mpmath.mpf(2) ** j
                row.append((factor * row[j - 1] - table[level - 1][j - 1]) / (factor - 1))
            table.append(row)
            current = row[-1]
            if previous is not None:
                spread = float(abs(current - previous) / abs(current))
                if level + 1 >= cfg.min_levels and spread <= cfg.accept_spread:
                    logger.debug(f"F0{x} q={q} converged at level {level}: spread {spread:.2e}")
                    return float(current)
            previous = current

    estimates = [float(row[-1]) for row in table[-2:]]
    if spread is None or spread > cfg.fail_spread:
        raise NumericError(f"F0 extrapolation did not converge for lambda={x}, q={q}", estimates)
    logger.warning(f"F0{x} q={q} accepted with spread {spread:.2e}")
    return estimates[-1]


def F0(weight, p: WalkParams, cfg: Optional[SpecialFnConfig] = None) -> float:
    """
    Fonction sphérique fondamentale F₀(λ) = P_λ(0).

    La singularité apparente en 0 est levée en évaluant P_λ(εu) pour
    ε = ε₀/2^k et en extrapolant par Richardson.

    Args:
        weight: poids dominant λ
        p: paramètres de marche (seuls r et q interviennent)
        cfg: configuration de l'extrapolation

    Returns:
        F₀(λ) > 0

    Raises:
        NumericError: si l'extrapolation ne converge pas
    """
    x = _weight_tuple(weight)
    if len(x) != p.rank or any(v < 0 for v in x):
        raise InputError(f"weight {x} is not dominant of rank {p.rank}")
    cfg = cfg or config_manager.get_config().special
    value = _f0_cached(x, p.q, cfg)
    if value <= 0:
        raise NumericError(f"F0{x} is not positive: {value}")
    return value


def f0_rank1(k: int, q: int) -> float:
    """Forme close en rang 1 : F₀(k) = q^{−k/2}(1 + k(q−1)/(q+1))."""
    return q ** (-k / 2) * (1 + k * (q - 1) / (q + 1))


def F0_estimate(weight, p: WalkParams) -> float:
    """Enveloppe q^{−⟨ρ,λ⟩} ∏_{α∈R⁺} (1 + ⟨α,λ⟩)."""
    x = _weight_tuple(weight)
    system = root_system(p.rank)
    value = float(p.q) ** (-float(system.rho_pairing(x)))
    for pairing in system.root_pairings(x):
        value *= 1 + pairing
    return value


def reachable(rank: int, n: int, weight) -> bool:
    """
    Support structurel de p_n : vrai si λ est atteignable en n pas.

    Rang 1 : arbre biparti, |λ| ≤ n et n ≡ |λ| mod 2. Rang ≥ 2 : n = 0
    seulement en 0, n = 1 seulement sur les poids fondamentaux, puis |λ| ≤ n.
    """
    x = _weight_tuple(weight)
    length = sum(x)
    if n < 0 or length > n:
        return False
    if rank == 1:
        return (n - length) % 2 == 0
    if n == 0:
        return length == 0
    if n == 1:
        return length == 1
    return True

"""
Densités de transition par inversion de Plancherel

Ce module calcule pₙ(λ) par quadrature trapézoïdale périodique sur le tore
𝔞/2πQ, sous trois formes :
- la forme brute (polynôme P_λ et densité de Plancherel |c|⁻²) ;
- la forme de contour hⁿ e^{−⟨λ,z⟩}/c(z) = hⁿ Δ e^{−⟨λ+ρ,z⟩}/b, partout
  régulière, éventuellement décalée en z = s(δ) + iθ ;
- la même forme pour tous les λ à la fois par transformée de Fourier rapide.

Tous les résultats sont rendus en échelle logarithmique.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from functools import lru_cache
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from core.config import QuadratureConfig, config_manager
from core.errors import InputError, NumericError, UnsupportedError
from models import LogDensity, WalkParams
from services.phase import PhaseProblem, solve_stationary
from services.root_system import root_system
from services.special_fn import (
    h_values, inverse_c_values, macdonald_values, plancherel_values,
    poincare_polynomial, reachable, sigma,
)


logger = logging.getLogger(__name__)

MAX_FOURIER_RANK = 4
MAX_NODES = 1 << 24
CHUNK = 1 << 16
GOLDEN = (math.sqrt(5) - 1) / 2

Integrand = Callable[[np.ndarray], np.ndarray]


def _check_request(p: WalkParams, n: int, weight: Sequence[int]) -> Tuple[int, ...]:
    if p.rank > MAX_FOURIER_RANK:
        raise UnsupportedError(f"Fourier inversion is limited to rank <= {MAX_FOURIER_RANK}")
    x = tuple(int(v) for v in weight)
    if len(x) != p.rank or any(v < 0 for v in x):
        raise InputError(f"weight {x} is not dominant of rank {p.rank}")
    if n < 0:
        raise InputError(f"number of steps must be >= 0, got {n}")
    return x


def grid_offsets(rank: int) -> np.ndarray:
    """
    Décalages γ_j = frac(j²g) des nœuds, g nombre d'or.

    Pour toute racine, la combinaison des γ_j qui intervient dans ⟨α,θ⟩ est
    un multiple non nul de g plus un entier : aucun nœud ne tombe sur un mur.
    """
    return np.array([(j * j * GOLDEN) % 1.0 for j in range(1, rank + 1)])


def _start_points(rank: int, n: int, x: Tuple[int, ...], cfg: QuadratureConfig) -> int:
    base = cfg.base_points if rank <= 3 else 16
    needed = 2 * (n + sum(x)) + 16
    return max(base, 1 << max(0, needed - 1).bit_length())


def _torus_mean(func: Integrand, rank: int, points: int, offset: np.ndarray,
                threads: int) -> Tuple[complex, float]:
    """
    Moyenne de func sur la grille ((k + offset)/M)·2π, k ∈ [0,M)^r.

    Les sommes par bloc sont combinées dans l'ordre des blocs : le résultat
    ne dépend pas du nombre de threads.
    """
    total = points ** rank
    shape = (points,) * rank

    def block(start: int) -> Tuple[float, float, float]:
        index = np.arange(start, min(start + CHUNK, total))
        t = (np.stack(np.unravel_index(index, shape), axis=-1) + offset) / points
        values = func(2 * np.pi * t)
        return float(np.sum(values.real)), float(np.sum(values.imag)), float(np.sum(np.abs(values)))

    starts = range(0, total, CHUNK)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(block, starts))
        # list(map) conserve l'ordre des blocs
    else:
        parts = [block(start) for start in starts]

    real = math.fsum(part[0] for part in parts) / total
    imag = math.fsum(part[1] for part in parts) / total
    scale = math.fsum(part[2] for part in parts) / total
    return complex(real, imag), scale


def _quadrature(func: Integrand, rank: int, start: int, offset: np.ndarray,
                cfg: QuadratureConfig, threads: int) -> Tuple[complex, float, int]:
    """
    Moyenne convergée par doublements successifs de la grille.

    Returns:
        (moyenne, erreur relative estimée, points par dimension)

    Raises:
        NumericError: si la tolérance n'est pas atteinte, avec les deux
            dernières estimations
    """
    points = start
    previous = None
    mean = None
    for _ in range(cfg.max_doublings + 1):
        if points ** rank > MAX_NODES:
            break
        mean, scale = _torus_mean(func, rank, points, offset, threads)
        if previous is not None:
            error = abs(mean - previous)
            floor = 64 * np.finfo(float).eps * scale
            if error <= cfg.tolerance * abs(mean) or error <= floor:
                relative = error / abs(mean) if mean != 0 else math.inf
                logger.debug(f"Quadrature converged with M={points}: error={relative:.3g}")
                return mean, relative, points
        previous = mean
        points *= 2

    estimates = [] if mean is None else [abs(previous), abs(mean)]
    raise NumericError(
        f"torus quadrature did not reach tolerance {cfg.tolerance} (last grid {points // 2})",
        estimates,
    )


def _structural_zero(p: WalkParams, n: int, x: Tuple[int, ...], method: str) -> Optional[LogDensity]:
    if reachable(p.rank, n, x):
        return None
    return LogDensity(log_value=-math.inf, method=method, error_estimate=0.0)


def _log_positive(mean: complex, method: str) -> float:
    if not mean.real > 0:
        raise NumericError(
            f"{method} integral has non-positive real part {mean.real:.3e}; increase the resolution",
            [mean.real, mean.imag],
        )
    return math.log(mean.real)


def _threads() -> int:
    return config_manager.get_config().run.threads


def density_plancherel(p: WalkParams, n: int, weight: Sequence[int],
                       cfg: Optional[QuadratureConfig] = None) -> LogDensity:
    """
    Forme brute de l'inversion :
    pₙ(λ) = [W₀(q⁻¹)/|W₀|] σⁿ moyenne_θ[h(iθ)ⁿ P_λ(−iθ) |c(iθ)|⁻²].

    Les nœuds sont décalés pour éviter les singularités apparentes de P_λ
    sur les murs.
    """
    x = _check_request(p, n, weight)
    cfg = cfg or config_manager.get_config().quadrature
    zero = _structural_zero(p, n, x, "fourier-raw")
    if zero is not None:
        return zero
    system = root_system(p.rank)
    h_zero = float(h_values(np.zeros((1, p.rank)), p)[0].real)

    def integrand(theta: np.ndarray) -> np.ndarray:
        ratio = h_values(1j * theta, p) / h_zero
        return ratio ** n * macdonald_values(x, -1j * theta, p.rank, p.q) * plancherel_values(theta, p.rank, p.q)

    mean, error, points = _quadrature(
        integrand, p.rank, _start_points(p.rank, n, x, cfg), grid_offsets(p.rank), cfg, _threads()
    )
    log_value = (
        n * math.log(sigma(p) * h_zero)
        + math.log(float(poincare_polynomial(p.rank, p.q)) / system.order)
        + _log_positive(mean, "Plancherel")
    )
    return LogDensity(log_value=log_value, method="fourier-raw", error_estimate=error, grid_points=points)


@lru_cache(maxsize=None)
def contour_calibration(rank: int, q: int) -> float:
    """
    Constante de normalisation de la forme de contour, fixée par p₀(0) = 1.

    Elle vaut 1 à la précision machine (terme constant de 1/c) ; elle est
    mesurée une fois par (r, q) puis conservée.
    """
    cfg = config_manager.get_config().quadrature
    zeros = np.zeros(rank)

    def integrand(theta: np.ndarray) -> np.ndarray:
        return inverse_c_values(zeros + 1j * theta, rank, q)

    mean, _, _ = _quadrature(integrand, rank, _start_points(rank, 0, (0,) * rank, cfg), zeros, cfg, 1)
    logger.info(f"Contour calibration for rank={rank}, q={q}: {mean.real:.17g}")
    return mean.real


def shift_point(p: WalkParams, n: int, x: Tuple[int, ...], cfg: QuadratureConfig) -> Optional[np.ndarray]:
    """
    Point s(δ) du contour décalé, ou None si le contour reste en 0.

    Politique automatique : décalage pour n ≥ 20 et |δ| > 0.2 ; |δ| est
    ramené à 0.999 près du bord.
    """
    raw = np.array([(v + 1) / (n + p.rank) for v in x])
    length = float(raw.sum())
    enabled = cfg.shift if cfg.shift is not None else (n >= cfg.shift_min_steps and length > cfg.shift_min_delta)
    if not enabled or n == 0:
        return None
    if length > cfg.shift_delta_cap:
        raw = raw * cfg.shift_delta_cap / length
    solution = solve_stationary(PhaseProblem(p, tuple(raw)))
    return np.array(solution.s_root)


def _contour_integrand(p: WalkParams, n: int, x: Tuple[int, ...], s_root: np.ndarray) -> Tuple[Integrand, float]:
    h_s = float(h_values(s_root[None, :], p)[0].real)
    lam = np.array(x, dtype=float)

    def integrand(theta: np.ndarray) -> np.ndarray:
        z = s_root + 1j * theta
        ratio = h_values(z, p) / h_s
        return ratio ** n * np.exp(-1j * (theta @ lam)) * inverse_c_values(z, p.rank, p.q)

    return integrand, h_s


def density_contour(p: WalkParams, n: int, weight: Sequence[int],
                    cfg: Optional[QuadratureConfig] = None) -> LogDensity:
    """
    Forme de contour :
    log pₙ(λ) = n·log(σh(s)) − ⟨ρ,λ⟩log q − ⟨λ,s⟩
                + log moyenne_θ[(h(s+iθ)/h(s))ⁿ e^{−i⟨λ,θ⟩}/c(s+iθ)].

    Raises:
        NumericError: si la partie réelle convergée n'est pas positive
    """
    x = _check_request(p, n, weight)
    cfg = cfg or config_manager.get_config().quadrature
    zero = _structural_zero(p, n, x, "fourier")
    if zero is not None:
        return zero
    s_point = shift_point(p, n, x, cfg)
    s_root = s_point if s_point is not None else np.zeros(p.rank)
    integrand, h_s = _contour_integrand(p, n, x, s_root)

    mean, error, points = _quadrature(
        integrand, p.rank, _start_points(p.rank, n, x, cfg), np.zeros(p.rank), cfg, _threads()
    )
    system = root_system(p.rank)
    log_value = (
        n * math.log(sigma(p) * h_s)
        - float(system.rho_pairing(x)) * math.log(p.q)
        - float(np.dot(x, s_root))
        + _log_positive(mean, "contour")
        - math.log(contour_calibration(p.rank, p.q))
    )
    return LogDensity(
        log_value=log_value, method="fourier", error_estimate=error,
        grid_points=points, shifted=s_point is not None,
    )


def density_fourier_all(p: WalkParams, n: int, cfg: Optional[QuadratureConfig] = None,
                        s_root: Optional[Sequence[float]] = None) -> Dict[Tuple[int, ...], LogDensity]:
    """
    Forme de contour pour tous les λ dominants avec |λ| ≤ n, par FFT.

    Les échantillons F(θ) = (h(s+iθ)/h(s))ⁿ/c(s+iθ) sur une grille M^r avec
    M ≥ 2n + 64 donnent, par transformée de Fourier, les moyennes de
    F·e^{−i⟨λ,θ⟩} pour tous les λ à la fois. Les entrées à partie réelle
    non positive (résolution insuffisante loin du contour) ont sign = −1.
    """
    _check_request(p, n, (0,) * p.rank)
    cfg = cfg or config_manager.get_config().quadrature
    s = np.zeros(p.rank) if s_root is None else np.asarray(s_root, dtype=float)
    points = max(cfg.base_points, 1 << (2 * n + 63).bit_length())
    if points ** p.rank > MAX_NODES:
        raise NumericError(f"FFT grid {points}^{p.rank} exceeds the node budget")

    h_s = float(h_values(s[None, :], p)[0].real)
    grid = 2 * np.pi * np.arange(points) / points
    samples = np.empty((points,) * p.rank, dtype=complex)
    # une tranche de la première coordonnée à la fois
    for i in range(points):
        theta = np.stack(np.meshgrid(grid[i:i + 1], *(grid,) * (p.rank - 1), indexing="ij"), axis=-1)[0]
        z = s + 1j * theta
        samples[i] = (h_values(z, p) / h_s) ** n * inverse_c_values(z, p.rank, p.q)
    coefficients = np.fft.fftn(samples) / samples.size

    system = root_system(p.rank)
    base = n * math.log(sigma(p) * h_s) - math.log(contour_calibration(p.rank, p.q))
    results = {}
    for x in _dominant_ball(p.rank, n):
        zero = _structural_zero(p, n, x, "fourier-fft")
        if zero is not None:
            results[x] = zero
            continue
        value = coefficients[tuple(v % points for v in x)].real
        log_rest = base - float(system.rho_pairing(x)) * math.log(p.q) - float(np.dot(x, s))
        if value > 0:
            results[x] = LogDensity(log_value=log_rest + math.log(value), method="fourier-fft",
                                    grid_points=points, shifted=s_root is not None)
        else:
            results[x] = LogDensity(log_value=-math.inf, sign=-1, method="fourier-fft",
                                    grid_points=points, shifted=s_root is not None)
    return results


def _dominant_ball(rank: int, n: int) -> List[Tuple[int, ...]]:
    """Poids dominants de longueur ≤ n, ordre lexicographique."""
    if rank == 1:
        return [(k,) for k in range(n + 1)]
    return [(head,) + tail for head in range(n + 1) for tail in _dominant_ball(rank - 1, n - head)]


def density_fourier_region(p: WalkParams, n: int, weights: Iterable[Sequence[int]],
                           cfg: Optional[QuadratureConfig] = None,
                           stride: float = 0.15) -> Dict[Tuple[int, ...], LogDensity]:
    """
    Densités sur une région par FFT décalées, une par groupe de δ voisins.

    Chaque poids est rattaché au centre de sa cellule de côté `stride` en δ ;
    la FFT du groupe est faite au point stationnaire de ce centre.
    """
    cfg = cfg or config_manager.get_config().quadrature
    groups: Dict[Tuple[int, ...], List[Tuple[int, ...]]] = {}
    for weight in weights:
        x = _check_request(p, n, weight)
        delta = [(v + 1) / (n + p.rank) for v in x]
        groups.setdefault(tuple(int(d // stride) for d in delta), []).append(x)

    results: Dict[Tuple[int, ...], LogDensity] = {}
    for cell, members in sorted(groups.items()):
        center = np.mean([[(v + 1) / (n + p.rank) for v in x] for x in members], axis=0)
        if center.sum() > cfg.shift_delta_cap:
            center = center * cfg.shift_delta_cap / center.sum()
        s_root = solve_stationary(PhaseProblem(p, tuple(center))).s_root if n > 0 else None
        table = density_fourier_all(p, n, cfg, s_root)
        for x in members:
            results[x] = table[x]
        logger.debug(f"FFT group {cell}: {len(members)} weights")
    return results


def integrand_periodicity(p: WalkParams, n: int, weight: Sequence[int], samples: int = 32,
                          seed: int = 42) -> float:
    """Écart maximal de l'intégrande de contour sous θ ↦ θ + 2πα_j."""
    x = _check_request(p, n, weight)
    integrand, _ = _contour_integrand(p, n, x, np.zeros(p.rank))
    rng = np.random.default_rng(seed)
    theta = rng.uniform(0, 2 * np.pi, size=(samples, p.rank))
    base = integrand(theta)
    deviation = 0.0
    # ⟨λ_k, α_j⟩ = δ_kj : α_j a pour coordonnées de racines e_j
    for shift in np.eye(p.rank):
        deviation = max(deviation, float(np.max(np.abs(integrand(theta + 2 * np.pi * shift) - base))))
    return deviation

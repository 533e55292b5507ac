"""
Chaîne radiale exacte

Ce module construit la table de transition de la chaîne induite sur P⁺ par
une marche isotrope aux plus proches voisins (rangs 1 et 2), itère cette
table en arithmétique entière exacte et fournit le dénombrement des chemins
utilisé dans le régime de bord.

Les probabilités sont stockées comme entiers sur le dénominateur commun D
de la table : au temps n, la masse d'un poids vaut compte / Dⁿ.
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import gammaln

from core.config import DPConfig, config_manager
from core.errors import DomainError, InputError, ResourceError, UnsupportedError
from models import RadialTable, WalkParams
from services.root_system import root_system
from services.special_fn import n_lambda


logger = logging.getLogger(__name__)

# Régions : 1 si la coordonnée est ≥ 1, 0 si elle est nulle
REGIONS = {
    1: {"interior": (1,), "origin": (0,)},
    2: {"interior": (1, 1), "wall-1": (1, 0), "wall-2": (0, 1), "origin": (0, 0)},
}


def _check_rank(p: WalkParams):
    if p.rank not in REGIONS:
        raise UnsupportedError(
            f"exact radial dynamic programming is available in ranks 1 and 2, not {p.rank}; "
            f"use the fourier method"
        )


def region_of(weight: Sequence[int]) -> str:
    """Nom de la région de P⁺ contenant λ."""
    signature = tuple(1 if v > 0 else 0 for v in weight)
    for name, key in REGIONS[len(signature)].items():
        if key == signature:
            return name
    raise InputError(f"weight {tuple(weight)} has no radial region")


def _direction_weights(p: WalkParams) -> List[Tuple[Tuple[int, ...], Fraction]]:
    """
    Incréments bruts de la marche et leurs probabilités.

    Sur l'orbite de λ_j, la direction μ reçoit c_j·q^{⟨ρ,μ⟩+⟨ρ,λ_j⟩}/N_{λ_j}.
    """
    system = root_system(p.rank)
    weights = p.weights or (Fraction(1),)
    directions = []
    for c, fundamental in zip(weights, system.fundamental_weights):
        top = system.rho_pairing(fundamental)
        counts = {mu: p.q ** int(system.rho_pairing(mu) + top) for mu in system.orbit(fundamental)}
        total = sum(counts.values())
        for mu in sorted(counts, reverse=True):
            directions.append((mu, Fraction(c) * counts[mu] / total))
    return directions


def build_table(p: WalkParams) -> RadialTable:
    """
    Construit la table radiale exacte.

    Les incréments qui sortent de P⁺ sont repliés par la réflexion du mur
    traversé et leur masse est fusionnée avec celle de l'image.

    Args:
        p: paramètres de marche (rang 1 ou 2)

    Returns:
        Table région -> incrément -> probabilité

    Raises:
        UnsupportedError: en rang ≥ 3
    """
    _check_rank(p)
    system = root_system(p.rank)
    directions = _direction_weights(p)
    entries: Dict[str, Dict[Tuple[int, ...], Fraction]] = {}
    for name, base in REGIONS[p.rank].items():
        row: Dict[Tuple[int, ...], Fraction] = {}
        for mu, prob in directions:
            target = system.dominant(tuple(b + m for b, m in zip(base, mu)))
            increment = tuple(int(t) - b for t, b in zip(target, base))
            row[increment] = row.get(increment, Fraction(0)) + prob
        entries[name] = row
        if sum(row.values()) != 1:
            raise AssertionError(f"row {name} sums to {sum(row.values())}")
    return RadialTable(rank=p.rank, q=p.q, weights=tuple(p.weights), entries=entries)


def common_denominator(table: RadialTable) -> int:
    """Plus petit D tel que toutes les entrées fois D soient entières."""
    denominator = 1
    for row in table.entries.values():
        for value in row.values():
            denominator = math.lcm(denominator, value.denominator)
    return denominator


@dataclass(frozen=True)
class RadialDistribution:
    """Loi exacte de la chaîne radiale au temps n, issue de 0."""
    rank: int
    n: int
    scale: int
    counts: np.ndarray

    def mass(self, weight: Sequence[int]) -> Fraction:
        """p⁺ₙ(0, λ) exact."""
        index = tuple(weight)
        if len(index) != self.rank or any(v < 0 for v in index):
            raise InputError(f"weight {index} is not dominant of rank {self.rank}")
        if any(v >= s for v, s in zip(index, self.counts.shape)):
            return Fraction(0)
        return Fraction(int(self.counts[index]), self.scale)

    def items(self) -> Iterator[Tuple[Tuple[int, ...], Fraction]]:
        """Poids du support et masses, dans l'ordre lexicographique."""
        for index in zip(*np.nonzero(self.counts != 0)):
            index = tuple(int(v) for v in index)
            yield index, Fraction(int(self.counts[index]), self.scale)

    def support(self) -> List[Tuple[int, ...]]:
        return [index for index, _ in self.items()]

    def total(self) -> Fraction:
        return Fraction(int(sum(self.counts.flat)), self.scale)

    def log_mass(self, weight: Sequence[int]) -> float:
        """log p⁺ₙ(0, λ) sans passer par un flottant intermédiaire (−inf si nul)."""
        value = self.mass(weight)
        if value == 0:
            return -math.inf
        return math.log(value.numerator) - math.log(value.denominator)


def _integer_rows(table: RadialTable, denominator: int) -> Dict[Tuple[int, ...], List[Tuple[Tuple[int, ...], int]]]:
    rows = {}
    for name, row in table.entries.items():
        key = REGIONS[table.rank][name]
        rows[key] = [(mu, int(value * denominator)) for mu, value in row.items()]
    return rows


def _guard(p: WalkParams, n: int, cfg: DPConfig):
    if n < 0:
        raise DomainError(f"number of steps must be >= 0, got {n}")
    limit = cfg.max_steps_rank2 if p.rank == 2 else cfg.max_steps_rank1
    if n > limit:
        raise ResourceError(f"exact dynamic programming limited to n <= {limit} in rank {p.rank}")


def dp_history(p: WalkParams, n_max: int, cfg: Optional[DPConfig] = None) -> Iterator[RadialDistribution]:
    """
    Lois exactes aux temps 0, 1, ..., n_max.

    Chaque pas applique, région par région, les décalages de la table sur
    un tableau d'entiers Python de taille (n_max+2)^r.
    """
    _check_rank(p)
    cfg = cfg or config_manager.get_config().dp
    _guard(p, n_max, cfg)
    table = build_table(p)
    denominator = common_denominator(table)
    rows = _integer_rows(table, denominator)
    size = n_max + 2
    shape = (size,) * p.rank

    counts = np.zeros(shape, dtype=object)
    counts[(0,) * p.rank] = 1
    scale = 1
    yield RadialDistribution(p.rank, 0, scale, counts)

    for t in range(n_max):
        new = np.zeros(shape, dtype=object)
        for key, moves in rows.items():
            source = tuple(slice(0, 1) if k == 0 else slice(1, t + 1) for k in key)
            block = counts[source]
            for mu, weight in moves:
                target = tuple(slice(s.start + m, s.stop + m) for s, m in zip(source, mu))
                new[target] += weight * block
        counts = new
        scale *= denominator
        yield RadialDistribution(p.rank, t + 1, scale, counts)


@lru_cache(maxsize=16)
def _dp_cached(p: WalkParams, n: int) -> RadialDistribution:
    distribution = None
    for distribution in dp_history(p, n):
        pass
    logger.debug(f"Radial DP computed for rank={p.rank}, q={p.q}, n={n}")
    return distribution


def dp_run(p: WalkParams, n: int, history: bool = False):
    """
    Loi exacte de la chaîne radiale au temps n.

    Args:
        p: paramètres de marche
        n: nombre de pas
        history: retourne la liste de toutes les lois jusqu'à n

    Returns:
        RadialDistribution, ou liste de RadialDistribution si history
    """
    if history:
        return list(dp_history(p, n))
    _check_rank(p)
    _guard(p, n, config_manager.get_config().dp)
    return _dp_cached(p, n)


def density_dp(p: WalkParams, n: int, weight: Sequence[int]) -> Fraction:
    """pₙ(λ) = p⁺ₙ(0,λ) / N_λ exact."""
    x = tuple(int(v) for v in weight)
    if len(x) != p.rank or any(v < 0 for v in x):
        raise InputError(f"weight {x} is not dominant of rank {p.rank}")
    return dp_run(p, n).mass(x) / n_lambda(x, p)


def _admissible_moves(p: WalkParams) -> Dict[Tuple[int, ...], List[Tuple[int, ...]]]:
    table = build_table(p)
    return {
        REGIONS[p.rank][name]: [mu for mu, value in row.items() if value > 0]
        for name, row in table.entries.items()
    }


def path_count(n: int, weight: Sequence[int], p: Optional[WalkParams] = None) -> int:
    """
    Nombre M de chemins de 0 à λ en n pas dans P⁺ (probabilités ignorées).

    Raises:
        DomainError: si |λ| > n
    """
    p = p or WalkParams.distinguished(2, 2)
    x = tuple(int(v) for v in weight)
    if sum(x) > n:
        raise DomainError(f"|lambda| = {sum(x)} exceeds n = {n}")
    _check_rank(p)
    rows = _admissible_moves(p)
    counts: Dict[Tuple[int, ...], int] = {(0,) * p.rank: 1}
    for t in range(n):
        remaining = n - t - 1
        new: Dict[Tuple[int, ...], int] = {}
        for position, count in counts.items():
            key = tuple(1 if v > 0 else 0 for v in position)
            for mu in rows[key]:
                target = tuple(a + b for a, b in zip(position, mu))
                if abs(sum(target) - sum(x)) > remaining:
                    continue
                new[target] = new.get(target, 0) + count
        counts = new
    return counts.get(x, 0)


def choice_count(n: int, weight: Sequence[int]) -> int:
    """
    Borne inférieure explicite de M :
    n!/((x₁−d)!(x₂+2d)!)·(x₂+d)!/(x₂!d!) avec d = n−|x| et x₁ ≥ x₂.

    Raises:
        DomainError: si d < 0
    """
    x1, x2 = max(weight), min(weight)
    d = n - x1 - x2
    if d < 0:
        raise DomainError(f"d = n - |lambda| = {d} is negative")
    if x1 < d:
        return 0
    head = math.factorial(n) // (math.factorial(x1 - d) * math.factorial(x2 + 2 * d))
    return head * math.comb(x2 + d, d)


def log_choice_count(n: int, weight: Sequence[int]) -> float:
    """log de choice_count par log-factorielles (grands n)."""
    x1, x2 = max(weight), min(weight)
    d = n - x1 - x2
    if d < 0:
        raise DomainError(f"d = n - |lambda| = {d} is negative")
    if x1 < d:
        return -math.inf
    return float(
        gammaln(n + 1) - gammaln(x1 - d + 1) - gammaln(x2 + 2 * d + 1)
        + gammaln(x2 + d + 1) - gammaln(x2 + 1) - gammaln(d + 1)
    )


def path_count_normalized(n: int, weight: Sequence[int], count: int) -> float:
    """log de M·x₁^{x₁}(x₂+1)^{x₂+d+1/2}/n^{n+d} avec x₁ ≥ x₂."""
    x1, x2 = max(weight), min(weight)
    d = n - x1 - x2
    value = math.log(count) - (n + d) * math.log(n)
    if x1 > 0:
        value += x1 * math.log(x1)
    value += (x2 + d + 0.5) * math.log(x2 + 1)
    return value


def iter_path_counts(n_max: int, d_max: int, p: Optional[WalkParams] = None) -> Iterator[Tuple[int, Dict[Tuple[int, ...], int]]]:
    """
    Comptes de chemins M(n, λ) pour n = 1..n_max, restreints à n−|λ| ≤ d_max.

    Une seule passe : on itère la chaîne sans probabilités en écartant les
    positions qui ne peuvent plus revenir dans la bande.
    """
    p = p or WalkParams.distinguished(2, 2)
    _check_rank(p)
    rows = _admissible_moves(p)
    counts: Dict[Tuple[int, ...], int] = {(0,) * p.rank: 1}
    for n in range(1, n_max + 1):
        new: Dict[Tuple[int, ...], int] = {}
        for position, count in counts.items():
            key = tuple(1 if v > 0 else 0 for v in position)
            for mu in rows[key]:
                target = tuple(a + b for a, b in zip(position, mu))
                if sum(target) >= n - d_max:
                    new[target] = new.get(target, 0) + count
        counts = new
        yield n, counts


def path_count_band(n_max: int, d_max: int, p: Optional[WalkParams] = None,
                    n_min: int = 2) -> Dict[str, float]:
    """Bande de M·x₁^{x₁}(x₂+1)^{x₂+d+1/2}/n^{n+d} sur n ≤ n_max, d ≤ d_max."""
    low, high = math.inf, -math.inf
    witness_low = witness_high = None
    for n, counts in iter_path_counts(n_max, d_max, p):
        if n < n_min:
            continue
        for position, count in counts.items():
            if count == 0:
                continue
            value = path_count_normalized(n, position, count)
            if value < low:
                low, witness_low = value, [n, *position]
            if value > high:
                high, witness_high = value, [n, *position]
    logger.info(f"Path-count band for n <= {n_max}, d <= {d_max}: [{math.exp(low):.4g}, {math.exp(high):.4g}]")
    return {
        "min": math.exp(low), "max": math.exp(high), "ratio": math.exp(high - low),
        "witness_min": witness_low, "witness_max": witness_high,
    }


def enumerate_paths(p: WalkParams, n: int, weight: Sequence[int]) -> Tuple[int, Fraction]:
    """
    Oracle par énumération brute : nombre de chemins admissibles et masse
    p⁺ₙ(0,λ), en tirant les directions brutes de la marche puis en repliant
    chaque position dans P⁺.

    Raises:
        ResourceError: au-delà de la limite d'énumération
    """
    cfg = config_manager.get_config().dp
    if n > cfg.enumeration_limit:
        raise ResourceError(f"path enumeration limited to n <= {cfg.enumeration_limit}")
    _check_rank(p)
    target = tuple(int(v) for v in weight)
    system = root_system(p.rank)
    directions = _direction_weights(p)
    memo: Dict[Tuple[Tuple[int, ...], int], Dict] = {}

    def walk(position: Tuple[int, ...], steps: int) -> Dict[Tuple[Tuple[int, ...], ...], Fraction]:
        if (position, steps) in memo:
            return memo[position, steps]
        if abs(sum(target) - sum(position)) > steps:
            return {}
        if steps == 0:
            return {(): Fraction(1)} if position == target else {}
        paths: Dict[Tuple[Tuple[int, ...], ...], Fraction] = {}
        for mu, prob in directions:
            nxt = system.dominant(tuple(a + b for a, b in zip(position, mu)))
            nxt = tuple(int(v) for v in nxt)
            for tail, mass in walk(nxt, steps - 1).items():
                key = (nxt,) + tail
                paths[key] = paths.get(key, Fraction(0)) + prob * mass
        memo[position, steps] = paths
        return paths

    paths = walk((0,) * p.rank, n)
    return len(paths), sum(paths.values(), Fraction(0))


def harnack_profile(p: WalkParams, n_max: int, n_min: int = 2) -> List[Dict[str, float]]:
    """
    Pour chaque n, minimum de p_{n+1}(λ)/pₙ(μ) sur les paires voisines
    (μ = λ compris) où les deux densités sont positives.
    """
    rows = _admissible_moves(p)
    neighbours = sorted({mu for moves in rows.values() for mu in moves} | {(0,) * p.rank})
    profile = []
    previous = None
    log_norms: Dict[Tuple[int, ...], float] = {}

    def log_density(dist: RadialDistribution) -> Dict[Tuple[int, ...], float]:
        values = {}
        for index, mass in dist.items():
            if index not in log_norms:
                log_norms[index] = math.log(n_lambda(index, p))
            values[index] = math.log(mass.numerator) - math.log(mass.denominator) - log_norms[index]
        return values

    for dist in dp_history(p, n_max + 1):
        current = log_density(dist)
        if previous is not None and dist.n - 1 >= n_min:
            worst = math.inf
            for lam, value in current.items():
                for mu in neighbours:
                    other = tuple(a - b for a, b in zip(lam, mu))
                    if other in previous:
                        worst = min(worst, value - previous[other])
            profile.append({"n": dist.n - 1, "min_ratio": math.exp(worst)})
        previous = current
    return profile

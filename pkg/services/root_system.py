"""
Géométrie exacte du système de racines A_r

Ce module fournit les racines, les poids fondamentaux, l'action du groupe
de Weyl W₀ = 𝔖_{r+1}, l'accouplement euclidien et les conversions entre
coordonnées de poids (base des λ_j), coordonnées de racines (base des α_j,
s^j = ⟨λ_j, s⟩) et coordonnées ambiantes de somme nulle.

Les vecteurs du réseau sont des tuples d'entiers (ou de Fractions) en
coordonnées de poids ; les points de 𝔞 ou 𝔞_ℂ sont des AmbientVector.
"""

import itertools
import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Iterable, List, Sequence, Set, Tuple, Union

import numpy as np

from core.errors import InputError


logger = logging.getLogger(__name__)

MAX_RANK = 6

Lattice = Tuple[int, ...]


@dataclass(frozen=True)
class WeylElement:
    """
    Élément de W₀ = 𝔖_{r+1} agissant sur les coordonnées ambiantes.

    perm[k] est l'image de la position k : (w·z)[perm[k]] = z[k].
    """
    perm: Tuple[int, ...]

    @property
    def size(self) -> int:
        return len(self.perm)

    def compose(self, other: "WeylElement") -> "WeylElement":
        """Produit self ∘ other."""
        return WeylElement(tuple(self.perm[other.perm[k]] for k in range(self.size)))

    def inverse(self) -> "WeylElement":
        inv = [0] * self.size
        for k, image in enumerate(self.perm):
            inv[image] = k
        return WeylElement(tuple(inv))

    def is_identity(self) -> bool:
        return all(k == image for k, image in enumerate(self.perm))

    @cached_property
    def length(self) -> int:
        """Longueur ℓ(w) = nombre d'inversions."""
        return sum(
            1
            for i in range(self.size)
            for j in range(i + 1, self.size)
            if self.perm[i] > self.perm[j]
        )

    @property
    def det(self) -> int:
        return -1 if self.length % 2 else 1

    def act_ambient(self, coords: np.ndarray) -> np.ndarray:
        coords = np.asarray(coords)
        out = np.empty_like(coords)
        out[list(self.perm)] = coords
        return out

    def act_weight(self, x: Sequence[int]) -> Lattice:
        """Action sur un vecteur du réseau en coordonnées de poids (exacte)."""
        scaled = scaled_ambient(x)
        moved = [0] * len(scaled)
        for k, image in enumerate(self.perm):
            moved[image] = scaled[k]
        return from_scaled_ambient(moved)


def scaled_ambient(x: Sequence[int]) -> List[int]:
    """
    Coordonnées ambiantes multipliées par r+1 (entières pour x entier).

    S_k = (r+1)·Σ_{j≥k} x_j − Σ_j j·x_j.
    """
    r = len(x)
    weighted = sum((j + 1) * x[j] for j in range(r))
    tail = 0
    scaled = [0] * (r + 1)
    for k in range(r, -1, -1):
        if k < r:
            tail += x[k]
        scaled[k] = (r + 1) * tail - weighted
    return scaled


def from_scaled_ambient(scaled: Sequence[int]) -> Lattice:
    size = len(scaled)
    coords = []
    for j in range(size - 1):
        diff = scaled[j] - scaled[j + 1]
        if isinstance(diff, int) and diff % size == 0:
            coords.append(diff // size)
        else:
            coords.append(Fraction(diff, size))
    return tuple(coords)


@dataclass(frozen=True, eq=False)
class AmbientVector:
    """
    Point de 𝔞 (ou 𝔞_ℂ) en coordonnées ambiantes de somme nulle.

    Les conversions vers les coordonnées de poids (z_j = ⟨α_j, z⟩) et de
    racines (z^j = ⟨λ_j, z⟩) sont calculées à la demande.
    """
    coords: np.ndarray

    def __post_init__(self):
        coords = np.asarray(self.coords)
        if coords.dtype.kind not in "fc":
            coords = coords.astype(float)
        if coords.ndim != 1 or coords.size < 2:
            raise InputError(f"ambient vector needs at least two coordinates, got shape {coords.shape}")
        scale = max(1.0, float(np.max(np.abs(coords))))
        if abs(coords.sum()) > 1e-12 * scale * coords.size:
            raise InputError(f"ambient coordinates must sum to zero (sum={coords.sum()})")
        object.__setattr__(self, "coords", coords)

    @property
    def rank(self) -> int:
        return self.coords.size - 1

    @classmethod
    def from_weight_coords(cls, x: Sequence[Union[int, float, complex]]) -> "AmbientVector":
        values = np.asarray(x, dtype=complex if np.iscomplexobj(x) else float)
        r = values.size
        j = np.arange(1, r + 1)
        tail = np.concatenate([np.cumsum(values[::-1])[::-1], [0.0]])
        return cls(tail - np.dot(j, values) / (r + 1))

    @classmethod
    def from_root_coords(cls, c: Sequence[Union[int, float, complex]]) -> "AmbientVector":
        values = np.asarray(c, dtype=complex if np.iscomplexobj(c) else float)
        padded = np.concatenate([[0.0], values, [0.0]])
        return cls(np.diff(padded))

    def weight_coords(self) -> np.ndarray:
        return self.coords[:-1] - self.coords[1:]

    def root_coords(self) -> np.ndarray:
        return np.cumsum(self.coords)[:-1]

    def __add__(self, other: "AmbientVector") -> "AmbientVector":
        return AmbientVector(self.coords + other.coords)

    def __sub__(self, other: "AmbientVector") -> "AmbientVector":
        return AmbientVector(self.coords - other.coords)

    def __mul__(self, scalar: Union[float, complex]) -> "AmbientVector":
        return AmbientVector(self.coords * scalar)

    __rmul__ = __mul__

    def __neg__(self) -> "AmbientVector":
        return AmbientVector(-self.coords)

    def __repr__(self) -> str:
        return f"AmbientVector({np.array2string(self.coords, precision=6)})"


class RootSystem:
    """
    Données du système de racines A_r pour un rang fixé.

    Toutes les données sont immuables et partagées entre threads.
    """

    def __init__(self, rank: int):
        if not (1 <= rank <= MAX_RANK):
            raise InputError(f"rank {rank} outside supported range 1..{MAX_RANK}")
        self.rank = rank

    @property
    def num_positive(self) -> int:
        return self.rank * (self.rank + 1) // 2

    @property
    def order(self) -> int:
        return len(self.weyl_group)

    @cached_property
    def cartan(self) -> np.ndarray:
        r = self.rank
        return 2 * np.eye(r, dtype=int) - np.eye(r, k=1, dtype=int) - np.eye(r, k=-1, dtype=int)

    @cached_property
    def gram(self) -> Tuple[Tuple[Fraction, ...], ...]:
        """Matrice de Gram ⟨λ_i, λ_j⟩ = min(i,j) − ij/(r+1) (inverse de Cartan)."""
        r = self.rank
        return tuple(
            tuple(Fraction(min(i, j) * (r + 1) - i * j, r + 1) for j in range(1, r + 1))
            for i in range(1, r + 1)
        )

    @cached_property
    def gram_float(self) -> np.ndarray:
        return np.array([[float(v) for v in row] for row in self.gram])

    @cached_property
    def positive_roots(self) -> Tuple[Lattice, ...]:
        """Racines positives e_j − e_k (j < k) en coordonnées de poids, ordre lexicographique."""
        size = self.rank + 1
        roots = []
        for j, k in itertools.combinations(range(size), 2):
            roots.append(tuple(
                (i == j) - (i + 1 == j) - (i == k) + (i + 1 == k)
                for i in range(self.rank)
            ))
        return tuple(roots)

    @cached_property
    def positive_roots_root(self) -> Tuple[Lattice, ...]:
        """Racines positives en coordonnées de racines (α_j + … + α_{k−1})."""
        size = self.rank + 1
        return tuple(
            tuple(int(j <= i < k) for i in range(self.rank))
            for j, k in itertools.combinations(range(size), 2)
        )

    @cached_property
    def simple_roots(self) -> Tuple[Lattice, ...]:
        return tuple(tuple(int(v) for v in row) for row in self.cartan)

    @cached_property
    def fundamental_weights(self) -> Tuple[Lattice, ...]:
        return tuple(tuple(int(i == j) for i in range(self.rank)) for j in range(self.rank))

    @property
    def rho(self) -> Lattice:
        return tuple(1 for _ in range(self.rank))

    @cached_property
    def weyl_group(self) -> Tuple[WeylElement, ...]:
        return tuple(WeylElement(p) for p in itertools.permutations(range(self.rank + 1)))

    def check_lattice(self, x: Sequence) -> Tuple:
        if len(x) != self.rank:
            raise InputError(f"lattice vector {tuple(x)} has {len(x)} coordinates, rank is {self.rank}")
        return tuple(x)

    def orbit(self, x: Sequence[int]) -> Set[Lattice]:
        """Orbite W₀.x sans doublons."""
        x = self.check_lattice(x)
        scaled = scaled_ambient(x)
        return {from_scaled_ambient(p) for p in set(itertools.permutations(scaled))}

    def dominant(self, x: Sequence[int]) -> Lattice:
        """Représentant dominant de W₀.x (coordonnées ambiantes décroissantes)."""
        x = self.check_lattice(x)
        return from_scaled_ambient(sorted(scaled_ambient(x), reverse=True))

    def stabilizer(self, x: Sequence[int]) -> List[WeylElement]:
        x = self.check_lattice(x)
        scaled = scaled_ambient(x)
        return [
            w for w in self.weyl_group
            if all(scaled[w.perm[k]] == scaled[k] for k in range(len(scaled)))
        ]

    def pairing_exact(self, u: Sequence, v: Sequence) -> Fraction:
        u = self.check_lattice(u)
        v = self.check_lattice(v)
        total = Fraction(0)
        for i, ui in enumerate(u):
            if ui:
                row = self.gram[i]
                total += ui * sum(row[j] * vj for j, vj in enumerate(v) if vj)
        return total

    def rho_pairing(self, x: Sequence) -> Fraction:
        """⟨ρ, λ⟩ = Σ_j x_j·j(r+1−j)/2."""
        x = self.check_lattice(x)
        r = self.rank
        return Fraction(sum(x[j - 1] * j * (r + 1 - j) for j in range(1, r + 1)), 2)

    def root_pairings(self, x: Sequence) -> Tuple:
        """⟨α, λ⟩ pour toutes les racines positives (entiers pour λ entier)."""
        x = self.check_lattice(x)
        return tuple(sum(a * xi for a, xi in zip(alpha, x)) for alpha in self.positive_roots_root)


@lru_cache(maxsize=None)
def root_system(rank: int) -> RootSystem:
    """Système de racines partagé pour un rang donné."""
    return RootSystem(rank)


def _is_ambient(v) -> bool:
    return isinstance(v, AmbientVector)


def pairing(u, v):
    """
    Accouplement euclidien bilinéaire symétrique restreint à 𝔞.

    Args:
        u: AmbientVector ou vecteur du réseau (coordonnées de poids)
        v: idem, même rang

    Returns:
        Fraction exacte si les deux arguments sont des vecteurs du réseau,
        réel ou complexe sinon

    Raises:
        InputError: si les rangs diffèrent
    """
    rank_u = u.rank if _is_ambient(u) else len(u)
    rank_v = v.rank if _is_ambient(v) else len(v)
    if rank_u != rank_v:
        raise InputError(f"rank mismatch in pairing: {rank_u} vs {rank_v}")
    if not _is_ambient(u) and not _is_ambient(v):
        return root_system(rank_u).pairing_exact(u, v)
    a = u if _is_ambient(u) else AmbientVector.from_weight_coords([float(t) for t in u])
    b = v if _is_ambient(v) else AmbientVector.from_weight_coords([float(t) for t in v])
    value = np.dot(a.coords, b.coords)
    return complex(value) if np.iscomplexobj(value) else float(value)


def weyl_orbit(x: Sequence[int]) -> Set[Lattice]:
    """Orbite W₀.λ d'un vecteur du réseau."""
    return root_system(len(x)).orbit(x)


def pi_poly(z) -> Union[float, complex]:
    """
    Polynôme anti-invariant fondamental π(z) = ∏_{α∈R⁺} ⟨α, z⟩.

    Args:
        z: AmbientVector ou vecteur du réseau en coordonnées de poids
    """
    if not _is_ambient(z):
        system = root_system(len(z))
        values = system.root_pairings(z)
        result = 1
        for v in values:
            result *= v
        return result
    coords = z.coords
    result = 1.0
    for j, k in itertools.combinations(range(coords.size), 2):
        result = result * (coords[j] - coords[k])
    return result


def length(x: Iterable[int]) -> int:
    return sum(x)

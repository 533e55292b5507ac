"""
Algèbre exacte des exponentielles-polynômes

Un ExpPoly est une somme finie Σ c_λ e^λ où λ parcourt le demi-réseau des
poids (stocké en coordonnées de poids doublées) et c_λ est un rationnel
exact. Ce module fournit l'arithmétique de l'anneau, les dérivations
directionnelles, l'opérateur π(∂), la division exacte, les constructeurs
des fonctions h, h̃, Δ et la vérification exacte des formules de produit et
de différentiation.
"""

import heapq
import logging
import math
from fractions import Fraction
from itertools import product
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from core.errors import InputError, UnsupportedError
from models import IdentityReport, parse_rational
from services.root_system import AmbientVector, root_system


logger = logging.getLogger(__name__)

Scalar = Union[int, Fraction]
Key = Tuple[int, ...]

IDENTITIES = (
    "ProductFormulaA2",
    "CoshProductA2",
    "DifferentiationFormulaA2",
    "GeneralDifferentiationRankTwo",
    "ProductDiffTilde",
    "ProductFormulaAr",
    "DifferentiationFormula1Ar",
    "DifferentiationFormula2Ar",
    "WeylDenominator",
)

# Grille rationnelle 4×4 : les deux membres sont de degré ≤ 3 en chaque c_j
COEFFICIENT_GRID = (Fraction(-1), Fraction(1, 3), Fraction(1), Fraction(2))


def _normalize(value: Scalar) -> Scalar:
    if isinstance(value, Fraction) and value.denominator == 1:
        return int(value.numerator)
    return value


def _as_key(weight: Sequence) -> Key:
    """Convertit un poids (entiers ou demi-entiers) en clé doublée."""
    key = []
    for v in weight:
        doubled = 2 * Fraction(v)
        if doubled.denominator != 1:
            raise InputError(f"weight {tuple(weight)} is not in the half lattice")
        key.append(int(doubled))
    return tuple(key)


class ExpPoly:
    """
    Exponentielle-polynôme exacte sur le demi-réseau des poids.

    Les coefficients nuls ne sont jamais stockés ; l'égalité compare les
    dictionnaires de coefficients.
    """

    __slots__ = ("rank", "terms")

    def __init__(self, rank: int, terms: Optional[Dict[Key, Scalar]] = None):
        self.rank = rank
        clean = {}
        for key, coef in (terms or {}).items():
            if coef:
                if len(key) != rank:
                    raise InputError(f"key {key} does not match rank {rank}")
                clean[tuple(key)] = _normalize(coef)
        self.terms = clean

    @classmethod
    def constant(cls, rank: int, value: Scalar = 1) -> "ExpPoly":
        return cls(rank, {(0,) * rank: parse_rational(value)})

    @classmethod
    def monomial(cls, rank: int, weight: Sequence, coef: Scalar = 1) -> "ExpPoly":
        """Monôme c·e^λ, λ en coordonnées de poids (demi-entiers admis)."""
        if len(weight) != rank:
            raise InputError(f"weight {tuple(weight)} does not match rank {rank}")
        return cls(rank, {_as_key(weight): parse_rational(coef)})

    def _check(self, other: "ExpPoly"):
        if other.rank != self.rank:
            raise InputError(f"rank mismatch: {self.rank} vs {other.rank}")

    def _lift(self, other) -> "ExpPoly":
        if isinstance(other, ExpPoly):
            self._check(other)
            return other
        if isinstance(other, (int, Fraction)):
            return ExpPoly.constant(self.rank, other)
        return NotImplemented

    def __add__(self, other) -> "ExpPoly":
        other = self._lift(other)
        if other is NotImplemented:
            return other
        out = dict(self.terms)
        for key, coef in other.terms.items():
            out[key] = out.get(key, 0) + coef
        return ExpPoly(self.rank, out)

    __radd__ = __add__

    def __neg__(self) -> "ExpPoly":
        return ExpPoly(self.rank, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other) -> "ExpPoly":
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other) -> "ExpPoly":
        return (-self) + other

    def scale(self, factor: Scalar) -> "ExpPoly":
        factor = parse_rational(factor)
        return ExpPoly(self.rank, {k: c * factor for k, c in self.terms.items()})

    def __mul__(self, other) -> "ExpPoly":
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        if not isinstance(other, ExpPoly):
            return NotImplemented
        self._check(other)
        out: Dict[Key, Scalar] = {}
        for k1, c1 in self.terms.items():
            for k2, c2 in other.terms.items():
                key = tuple(a + b for a, b in zip(k1, k2))
                out[key] = out.get(key, 0) + c1 * c2
        return ExpPoly(self.rank, out)

    __rmul__ = __mul__

    def __pow__(self, exponent: int) -> "ExpPoly":
        if exponent < 0:
            raise InputError("negative powers leave the polynomial ring")
        result = ExpPoly.constant(self.rank, 1)
        for _ in range(exponent):
            result = result * self
        return result

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = ExpPoly.constant(self.rank, other)
        if not isinstance(other, ExpPoly):
            return NotImplemented
        return self.rank == other.rank and self.terms == other.terms

    __hash__ = None

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __len__(self) -> int:
        return len(self.terms)

    def __repr__(self) -> str:
        shown = ", ".join(f"{c}·e^{self.weight_of(k)}" for k, c in sorted(self.terms.items())[:6])
        more = "" if len(self.terms) <= 6 else f", … ({len(self.terms)} terms)"
        return f"ExpPoly(rank={self.rank}: {shown}{more})"

    @staticmethod
    def weight_of(key: Key) -> Tuple[Scalar, ...]:
        """Clé doublée -> poids en coordonnées de poids."""
        return tuple(_normalize(Fraction(k, 2)) for k in key)

    def coefficient(self, weight: Sequence) -> Scalar:
        return self.terms.get(_as_key(weight), 0)

    def leading(self) -> Tuple[Key, Scalar]:
        """Terme dominant pour l'ordre lexicographique des clés."""
        if not self.terms:
            raise InputError("zero exponential polynomial has no leading term")
        key = max(self.terms)
        return key, self.terms[key]

    def trailing(self) -> Tuple[Key, Scalar]:
        if not self.terms:
            raise InputError("zero exponential polynomial has no trailing term")
        key = min(self.terms)
        return key, self.terms[key]

    def evaluate(self, z: AmbientVector) -> complex:
        """
        Évalue f(z) = Σ c_λ e^{⟨λ,z⟩}.

        Args:
            z: point de 𝔞_ℂ

        Returns:
            Valeur complexe
        """
        if z.rank != self.rank:
            raise InputError(f"rank mismatch: {self.rank} vs {z.rank}")
        if not self.terms:
            return 0j
        keys = np.array(list(self.terms.keys()), dtype=float)
        coefs = np.array([float(c) for c in self.terms.values()])
        exponents = keys @ z.root_coords().astype(complex) / 2
        return complex(np.dot(coefs, np.exp(exponents)))

    def directional_derivative(self, alpha: Sequence) -> "ExpPoly":
        """
        Dérivation ∂_α : c_λ e^λ ↦ c_λ⟨α,λ⟩ e^λ.

        Args:
            alpha: vecteur du réseau en coordonnées de poids
        """
        system = root_system(self.rank)
        alpha = system.check_lattice(alpha)
        row = [sum(a * system.gram[i][j] for i, a in enumerate(alpha) if a) for j in range(self.rank)]
        out = {}
        for key, coef in self.terms.items():
            factor = sum(r * k for r, k in zip(row, key) if k) / 2
            if factor:
                out[key] = coef * factor
        return ExpPoly(self.rank, out)

    def pi_partial(self, order: Optional[Sequence[int]] = None) -> "ExpPoly":
        """
        Applique π(∂) = ∏_{α∈R⁺} ∂_α.

        Args:
            order: permutation optionnelle des racines positives
                (ordre lexicographique par défaut)
        """
        roots = root_system(self.rank).positive_roots
        if order is not None:
            roots = [roots[i] for i in order]
        result = self
        for alpha in roots:
            result = result.directional_derivative(alpha)
            if not result:
                break
        return result

    def weyl_transform(self, w) -> "ExpPoly":
        """Action w·f : e^λ ↦ e^{wλ}."""
        out = {}
        for key, coef in self.terms.items():
            moved = w.act_weight(key)
            out[tuple(int(v) for v in moved)] = coef
        return ExpPoly(self.rank, out)

    def is_invariant(self) -> bool:
        group = root_system(self.rank).weyl_group
        return all(self.weyl_transform(w) == self for w in group)

    def is_skew(self) -> bool:
        group = root_system(self.rank).weyl_group
        return all(self.weyl_transform(w) == self.scale(w.det) for w in group)

    def exact_divide(self, divisor: "ExpPoly") -> Optional["ExpPoly"]:
        """
        Division exacte f / g dans l'anneau des exponentielles-polynômes.

        Division longue selon l'ordre lexicographique des clés ; les
        exposants du quotient sont bornés coordonnée par coordonnée par les
        enveloppes de f et g, ce qui garantit l'arrêt.

        Args:
            divisor: diviseur g non nul

        Returns:
            Le quotient si g divise f, None sinon
        """
        self._check(divisor)
        if not divisor.terms:
            raise InputError("division by the zero exponential polynomial")
        if not self.terms:
            return ExpPoly(self.rank)

        lead_key, lead_coef = divisor.leading()
        lows = [min(k[i] for k in self.terms) - min(k[i] for k in divisor.terms) for i in range(self.rank)]
        highs = [max(k[i] for k in self.terms) - max(k[i] for k in divisor.terms) for i in range(self.rank)]

        remainder = dict(self.terms)
        heap = [tuple(-v for v in key) for key in remainder]
        heapq.heapify(heap)
        quotient: Dict[Key, Scalar] = {}

        while heap:
            key = tuple(-v for v in heapq.heappop(heap))
            coef = remainder.get(key, 0)
            if not coef:
                continue
            q_key = tuple(a - b for a, b in zip(key, lead_key))
            if any(v < lo or v > hi for v, lo, hi in zip(q_key, lows, highs)):
                return None
            q_coef = _normalize(Fraction(coef) / lead_coef)
            quotient[q_key] = q_coef
            for d_key, d_coef in divisor.terms.items():
                target = tuple(a + b for a, b in zip(q_key, d_key))
                updated = remainder.get(target, 0) - q_coef * d_coef
                if updated:
                    if target not in remainder or not remainder[target]:
                        heapq.heappush(heap, tuple(-v for v in target))
                    remainder[target] = updated
                else:
                    remainder.pop(target, None)
        return ExpPoly(self.rank, quotient)


def first_mismatch(lhs: ExpPoly, rhs: ExpPoly) -> Optional[Key]:
    """Première clé (ordre lexicographique) où les coefficients diffèrent."""
    keys = sorted(set(lhs.terms) | set(rhs.terms))
    for key in keys:
        if lhs.terms.get(key, 0) != rhs.terms.get(key, 0):
            return key
    return None


def orbit_sum(rank: int, weight: Sequence[int], coef: Scalar = 1) -> ExpPoly:
    """Σ_{μ∈W₀.λ} c·e^μ."""
    coef = parse_rational(coef)
    return ExpPoly(rank, {_as_key(mu): coef for mu in root_system(rank).orbit(weight)})


def h_poly(rank: int, coefficients: Optional[Sequence[Scalar]] = None) -> ExpPoly:
    """
    Fonction h = Σ_j a_j Σ_{λ∈W₀.λ_j} e^λ.

    Args:
        rank: rang r
        coefficients: poids a_j par orbite fondamentale (1 par défaut)
    """
    system = root_system(rank)
    if coefficients is None:
        coefficients = [1] * rank
    if len(coefficients) != rank:
        raise InputError(f"{len(coefficients)} orbit coefficients given for rank {rank}")
    result = ExpPoly(rank)
    for weight, a in zip(system.fundamental_weights, coefficients):
        if a:
            result = result + orbit_sum(rank, weight, a)
    return result


def h_rank_two(c1: Scalar, c2: Scalar) -> ExpPoly:
    """h = c₁h₁ + c₂h₂ en rang 2."""
    return h_poly(2, (parse_rational(c1), parse_rational(c2)))


def h_tilde(c1: Scalar, c2: Scalar) -> ExpPoly:
    """h̃ = c₁c₂h + c₁³ + c₂³."""
    c1, c2 = parse_rational(c1), parse_rational(c2)
    return h_rank_two(c1, c2).scale(c1 * c2) + (c1 ** 3 + c2 ** 3)


def h_tilde_product(c1: Scalar, c2: Scalar) -> ExpPoly:
    """Forme produit de h̃ (trois facteurs binomiaux en demi-poids)."""
    c1, c2 = parse_rational(c1), parse_rational(c2)
    half = Fraction(1, 2)
    factors = [
        (ExpPoly.monomial(2, (half, 0), c2) + ExpPoly.monomial(2, (-half, 0), c1)),
        (ExpPoly.monomial(2, (0, -half), c2) + ExpPoly.monomial(2, (0, half), c1)),
        (ExpPoly.monomial(2, (-half, half), c2) + ExpPoly.monomial(2, (half, -half), c1)),
    ]
    return factors[0] * factors[1] * factors[2]


def weyl_denominator(rank: int) -> ExpPoly:
    """Δ = ∏_{α∈R⁺} (e^{α/2} − e^{−α/2})."""
    result = ExpPoly.constant(rank, 1)
    for alpha in root_system(rank).positive_roots:
        # clé doublée de α/2 = coordonnées de α
        factor = ExpPoly(rank, {tuple(alpha): 1, tuple(-a for a in alpha): -1})
        result = result * factor
    return result


def alternating_denominator(rank: int) -> ExpPoly:
    """Σ_{w∈W₀} det(w) e^{wρ}."""
    system = root_system(rank)
    out: Dict[Key, Scalar] = {}
    for w in system.weyl_group:
        key = _as_key(w.act_weight(system.rho))
        out[key] = out.get(key, 0) + w.det
    return ExpPoly(rank, out)


def product_formula_rhs(rank: int) -> ExpPoly:
    """∏_{j=1}^{r+1} (e^{λ_j − λ_{j−1}} + 1) avec λ₀ = λ_{r+1} = 0."""
    one = ExpPoly.constant(rank, 1)
    result = one
    for j in range(1, rank + 2):
        weight = [0] * rank
        if j <= rank:
            weight[j - 1] += 1
        if j >= 2:
            weight[j - 2] -= 1
        result = result * (ExpPoly.monomial(rank, weight) + one)
    return result


def orbit_product(rank: int) -> ExpPoly:
    """∏_{λ∈W₀.λ₁} (e^λ + 1)."""
    one = ExpPoly.constant(rank, 1)
    result = one
    for mu in sorted(root_system(rank).orbit(root_system(rank).fundamental_weights[0])):
        result = result * (ExpPoly.monomial(rank, mu) + one)
    return result


def cosh_product_a2() -> ExpPoly:
    """(2cosh(λ₁/2))(2cosh(λ₂/2))(2cosh((λ₁−λ₂)/2))."""
    half = Fraction(1, 2)
    result = ExpPoly.constant(2, 1)
    for weight in ((half, 0), (0, half), (half, -half)):
        neg = tuple(-v for v in weight)
        result = result * (ExpPoly.monomial(2, weight) + ExpPoly.monomial(2, neg))
    return result


class PowerCache:
    """Puissances successives d'un ExpPoly, calculées à la demande."""

    def __init__(self, base: ExpPoly):
        self.base = base
        self.powers = [ExpPoly.constant(base.rank, 1)]

    def __getitem__(self, exponent: int) -> ExpPoly:
        if exponent < 0:
            raise InputError("negative powers leave the polynomial ring")
        while len(self.powers) <= exponent:
            self.powers.append(self.powers[-1] * self.base)
        return self.powers[exponent]


def solve_combination(target: ExpPoly, basis: Sequence[ExpPoly]) -> Optional[List[Fraction]]:
    """
    Résout target = Σ c_k basis_k exactement.

    Élimination de Gauss sur les coefficients (une ligne par clé), suivie
    d'une vérification complète du résultat.

    Returns:
        Les coefficients c_k, ou None si la base est liée ou si target
        n'est pas dans l'espace engendré
    """
    keys = sorted(set(target.terms).union(*[set(b.terms) for b in basis]), reverse=True)
    rows = [[Fraction(b.terms.get(k, 0)) for b in basis] + [Fraction(target.terms.get(k, 0))] for k in keys]
    width = len(basis)
    pivots = []
    row_index = 0
    for col in range(width):
        pivot = next((i for i in range(row_index, len(rows)) if rows[i][col] != 0), None)
        if pivot is None:
            return None
        rows[row_index], rows[pivot] = rows[pivot], rows[row_index]
        lead = rows[row_index][col]
        rows[row_index] = [v / lead for v in rows[row_index]]
        for i in range(len(rows)):
            if i != row_index and rows[i][col] != 0:
                factor = rows[i][col]
                rows[i] = [a - factor * b for a, b in zip(rows[i], rows[row_index])]
        pivots.append(row_index)
        row_index += 1
    solution = [rows[p][width] for p in pivots]
    check = ExpPoly(target.rank)
    for c, b in zip(solution, basis):
        check = check + b.scale(c)
    if check != target:
        return None
    return solution


def _coef_power_h_plus_two(m: int, x: Sequence[int]) -> int:
    """
    Coefficient de e^x dans (h+2)^m = ∏_{i=1}^{r+1} (1 + e^{ε_i})^m.

    Un monôme Σ k_i ε_i a pour coordonnées de poids x_j = k_j − k_{j+1}.
    """
    total = 0
    for t in range(m + 1):
        k = t
        term = math.comb(m, k)
        for xj in x:
            k = k - xj
            if k < 0 or k > m:
                term = 0
                break
            term *= math.comb(m, k)
        total += term
    return total


def dn_coefficient(rank: int, n: int) -> Fraction:
    """
    Constante d_n de π(∂)(h+2)^{n+r} = d_n (h+2)^n Δ, par extraction du
    coefficient dominant des deux membres.

    Args:
        rank: rang r
        n: entier ≥ 0

    Returns:
        d_n exact
    """
    if n < 0:
        raise InputError(f"d_n is defined for n >= 0, got {n}")
    system = root_system(rank)
    rho_orbit = [(w.act_weight(system.rho), w.det) for w in system.weyl_group]
    lead_delta = max(weight for weight, _ in rho_orbit)
    mu = tuple(n * (j == 0) + lead_delta[j] for j in range(rank))
    if any(isinstance(v, Fraction) for v in mu):
        raise UnsupportedError("leading weight is not integral")
    pi_mu = 1
    for pairing in system.root_pairings(mu):
        pi_mu *= pairing
    lhs = pi_mu * _coef_power_h_plus_two(n + rank, mu)
    rhs = 0
    for weight, det in rho_orbit:
        shifted = [a - b for a, b in zip(mu, weight)]
        if all(not isinstance(v, Fraction) for v in shifted):
            rhs += det * _coef_power_h_plus_two(n, shifted)
    if rhs == 0:
        raise UnsupportedError(f"degenerate leading coefficient at n={n}")
    return _normalize(Fraction(lhs, rhs))


def dn_growth(rank: int, ns: Sequence[int]) -> Dict[str, float]:
    """
    Exposant de croissance mesuré de d_n (pente de log d_n en log n).

    Returns:
        Dictionnaire {"exponent", "min_ratio", "max_ratio"} où les rapports
        sont d_n / n^{|R⁺|}
    """
    system = root_system(rank)
    ns = sorted(ns)
    values = [float(dn_coefficient(rank, n)) for n in ns]
    logs_n = np.log(np.array(ns, dtype=float))
    logs_d = np.log(np.array(values))
    slope = float(np.polyfit(logs_n, logs_d, 1)[0])
    ratios = [v / n ** system.num_positive for v, n in zip(values, ns)]
    return {"exponent": slope, "min_ratio": min(ratios), "max_ratio": max(ratios)}


def _report(name: str, rank: int, cases: int, mismatch=None, detail: str = "", coefficients=None) -> IdentityReport:
    if mismatch is None:
        return IdentityReport(
            name=name, rank=rank, passed=True, cases_checked=cases,
            detail=detail or "exact equality", coefficients=coefficients or {},
        )
    case, key = mismatch
    witness = [str(v) for v in ExpPoly.weight_of(key)] if key is not None else None
    logger.warning(f"Identity {name} failed at {case}, witness {witness}")
    return IdentityReport(
        name=name, rank=rank, passed=False, cases_checked=cases,
        witness=witness, detail=f"coefficient mismatch at {case}",
        coefficients=coefficients or {},
    )


def _check_equal(lhs: ExpPoly, rhs: ExpPoly) -> Optional[Key]:
    if lhs == rhs:
        return None
    key = first_mismatch(lhs, rhs)
    return key if key is not None else ()


def _verify_product_a2(rank: int, ns, samples) -> IdentityReport:
    h = h_poly(2)
    mismatch = _check_equal(h + 2, product_formula_rhs(2))
    value = (h + 2).evaluate(AmbientVector.from_weight_coords([0.0, 0.0]))
    detail = f"h(0)+2 = {value.real:g}"
    return _report("ProductFormulaA2", 2, 1, None if mismatch is None else ("product", mismatch), detail)


def _verify_cosh_a2(rank: int, ns, samples) -> IdentityReport:
    mismatch = _check_equal(h_poly(2) + 2, cosh_product_a2())
    return _report("CoshProductA2", 2, 1, None if mismatch is None else ("cosh", mismatch))


def _verify_differentiation_a2(rank: int, ns, samples) -> IdentityReport:
    h = h_poly(2)
    powers = PowerCache(h)
    delta = weyl_denominator(2)
    for n in ns:
        lhs = powers[n + 3].pi_partial()
        bracket = h.scale(n + 3) + 2 * (n + 1)
        rhs = (bracket * powers[n] * delta).scale((n + 3) * (n + 2))
        mismatch = _check_equal(lhs, rhs)
        if mismatch is not None:
            return _report("DifferentiationFormulaA2", 2, len(ns), (f"n={n}", mismatch))
    return _report("DifferentiationFormulaA2", 2, len(ns), detail=f"n in {min(ns)}..{max(ns)}")


def _verify_general_rank_two(rank: int, ns, samples) -> IdentityReport:
    delta = weyl_denominator(2)
    cases = 0
    for c1, c2 in samples:
        h = h_rank_two(c1, c2)
        powers = PowerCache(h)
        for n in ns:
            lhs = powers[n].pi_partial()
            rhs = ExpPoly(2)
            first = c1 * c2 * n * n * (n - 1)
            second = (c1 ** 3 + c2 ** 3) * n * (n - 1) * (n - 2)
            if first:
                rhs = rhs + (powers[n - 2] * delta).scale(first)
            if second:
                rhs = rhs + (powers[n - 3] * delta).scale(second)
            cases += 1
            mismatch = _check_equal(lhs, rhs)
            if mismatch is not None:
                return _report("GeneralDifferentiationRankTwo", 2, cases, (f"n={n}, c=({c1},{c2})", mismatch))
    return _report("GeneralDifferentiationRankTwo", 2, cases)


def _verify_tilde(rank: int, ns, samples) -> IdentityReport:
    delta = weyl_denominator(2)
    cases = 0
    for c1, c2 in samples:
        if not c1 or not c2:
            continue
        tilde = h_tilde(c1, c2)
        mismatch = _check_equal(tilde, h_tilde_product(c1, c2))
        if mismatch is not None:
            return _report("ProductDiffTilde", 2, cases, (f"product, c=({c1},{c2})", mismatch))
        powers = PowerCache(tilde)
        for n in ns:
            lhs = powers[n].pi_partial()
            factor = (c1 * c2) ** 3 * n * n * (n - 1)
            rhs = (powers[n - 2] * delta).scale(factor) if factor else ExpPoly(2)
            cases += 1
            mismatch = _check_equal(lhs, rhs)
            if mismatch is not None:
                return _report("ProductDiffTilde", 2, cases, (f"n={n}, c=({c1},{c2})", mismatch))
    return _report("ProductDiffTilde", 2, cases)


def _verify_product_ar(rank: int, ns, samples) -> IdentityReport:
    h = h_poly(rank)
    mismatch = _check_equal(h + 2, product_formula_rhs(rank))
    if mismatch is None:
        mismatch = _check_equal(h + 2, orbit_product(rank))
    return _report("ProductFormulaAr", rank, 2, None if mismatch is None else ("product", mismatch))


def solve_differentiation_coefficients(rank: int, n: int, h: Optional[ExpPoly] = None,
                                       delta: Optional[ExpPoly] = None) -> Tuple[Optional[Dict[int, Fraction]], str]:
    """
    Coefficients entiers c_k du polynôme r_n(h) de la formule de
    différentiation générale, résolus exactement à partir des coefficients.

    Returns:
        (coefficients {k: c_k} ou None, message)
    """
    system = root_system(rank)
    big_n = system.num_positive
    h = h if h is not None else h_poly(rank)
    delta = delta if delta is not None else weyl_denominator(rank)
    powers = PowerCache(h)
    shifted = PowerCache(h + 2)

    lhs = powers[n + big_n].pi_partial().scale(Fraction(math.factorial(n), math.factorial(n + big_n)))
    leading = shifted[big_n - rank] * powers[n] * delta
    remainder = (lhs - leading).exact_divide(delta)
    if remainder is None:
        return None, "remainder not divisible by the Weyl denominator"

    ks = list(range(rank, big_n))
    basis = [
        (shifted[k - rank] * powers[big_n - k + n]).scale(Fraction(math.factorial(n), math.factorial(n + big_n - k)))
        for k in ks
    ]
    if not basis:
        return ({}, "exact equality") if not remainder else (None, "nonzero remainder with empty basis")
    solution = solve_combination(remainder, basis)
    if solution is None:
        return None, "basis not independent or remainder outside its span"
    return {k: _normalize(c) for k, c in zip(ks, solution)}, "exact equality"


def _verify_differentiation_1_ar(rank: int, ns, samples) -> IdentityReport:
    h = h_poly(rank)
    delta = weyl_denominator(rank)
    found: Dict[str, List[str]] = {}
    for n in ns:
        coefficients, message = solve_differentiation_coefficients(rank, n, h, delta)
        if coefficients is None:
            logger.warning(f"DifferentiationFormula1Ar rank {rank} n={n}: {message}")
            return IdentityReport(
                name="DifferentiationFormula1Ar", rank=rank, passed=False,
                cases_checked=len(found), witness=[n], detail=message,
            )
        if any(isinstance(c, Fraction) for c in coefficients.values()):
            return IdentityReport(
                name="DifferentiationFormula1Ar", rank=rank, passed=False,
                cases_checked=len(found), witness=[n], detail="non-integral coefficient",
            )
        found[str(n)] = [f"c{k}={c}" for k, c in sorted(coefficients.items())]
    return _report("DifferentiationFormula1Ar", rank, len(ns), coefficients=found)


def _verify_differentiation_2_ar(rank: int, ns, samples) -> IdentityReport:
    shifted = PowerCache(h_poly(rank) + 2)
    delta = weyl_denominator(rank)
    values = {}
    for n in ns:
        d_n = dn_coefficient(rank, n)
        lhs = shifted[n + rank].pi_partial()
        rhs = (shifted[n] * delta).scale(d_n)
        mismatch = _check_equal(lhs, rhs)
        if mismatch is not None:
            return _report("DifferentiationFormula2Ar", rank, len(ns), (f"n={n}", mismatch))
        if d_n <= 0:
            return IdentityReport(
                name="DifferentiationFormula2Ar", rank=rank, passed=False,
                cases_checked=len(values), witness=[n], detail=f"d_n = {d_n} is not positive",
            )
        values[str(n)] = str(d_n)
    return _report("DifferentiationFormula2Ar", rank, len(ns), coefficients=values)


def _verify_weyl_denominator(rank: int, ns, samples) -> IdentityReport:
    mismatch = _check_equal(weyl_denominator(rank), alternating_denominator(rank))
    return _report("WeylDenominator", rank, 1, None if mismatch is None else ("denominator", mismatch))


_VERIFIERS: Dict[str, Callable] = {
    "ProductFormulaA2": _verify_product_a2,
    "CoshProductA2": _verify_cosh_a2,
    "DifferentiationFormulaA2": _verify_differentiation_a2,
    "GeneralDifferentiationRankTwo": _verify_general_rank_two,
    "ProductDiffTilde": _verify_tilde,
    "ProductFormulaAr": _verify_product_ar,
    "DifferentiationFormula1Ar": _verify_differentiation_1_ar,
    "DifferentiationFormula2Ar": _verify_differentiation_2_ar,
    "WeylDenominator": _verify_weyl_denominator,
}

_RANK_TWO_ONLY = {
    "ProductFormulaA2", "CoshProductA2", "DifferentiationFormulaA2",
    "GeneralDifferentiationRankTwo", "ProductDiffTilde",
}


def verify_identity(name: str, rank: int = 2, ns: Optional[Iterable[int]] = None,
                    samples: Optional[Iterable[Tuple[Scalar, Scalar]]] = None) -> IdentityReport:
    """
    Vérifie exactement une identité d'exponentielles-polynômes.

    Args:
        name: nom de l'identité (voir IDENTITIES)
        rank: rang r
        ns: valeurs de n pour les identités de puissances (n ≥ 0)
        samples: couples (c₁, c₂) rationnels (grille 4×4 par défaut)

    Returns:
        Rapport avec témoin en cas d'échec

    Raises:
        InputError: identité inconnue, n négatif ou rang incompatible
    """
    if name not in _VERIFIERS:
        raise InputError(f"unknown identity {name!r}; expected one of {', '.join(IDENTITIES)}")
    if name in _RANK_TWO_ONLY and rank != 2:
        raise InputError(f"identity {name} is stated in rank 2 only")
    if name in {"DifferentiationFormula1Ar", "DifferentiationFormula2Ar"} and rank < 2:
        raise InputError(f"identity {name} needs rank >= 2")
    ns = list(ns) if ns is not None else list(range(0, 9))
    if any(n < 0 for n in ns):
        raise InputError("power identities are checked for n >= 0 only")
    if samples is None:
        samples = list(product(COEFFICIENT_GRID, COEFFICIENT_GRID))
    samples = [(parse_rational(a), parse_rational(b)) for a, b in samples]

    logger.info(f"Verifying {name} in rank {rank} for n in {ns}")
    report = _VERIFIERS[name](rank, ns, samples)
    logger.debug(f"{name}: passed={report.passed}, cases={report.cases_checked}")
    return report

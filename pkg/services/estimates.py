"""
Estimations fermées des densités de transition

Ce module évalue les surfaces d'estimation optimales :
- rang 2 (régimes intérieur et bord, variante par la fonction sphérique) ;
- rang 1 (arbres homogènes) ;
- rang r (estimation bilatérale et borne supérieure, variante h̃) ;
- marches pondérées de rang 2 (borne supérieure e^{C(n−|x|)}) ;
et certifie le symbole ≈ par des bandes mesurées oracle / estimation.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from core.config import config_manager
from core.errors import DomainError, InputError, RegimeError
from models import BandReport, EstimateValue, SweepRow, WalkParams
from services.fourier_kernel import density_fourier_region
from services.phase import PhaseProblem, phi_batch, phi_rank1, solve_stationary
from services.radial_dp import dp_history, dp_run
from services.root_system import root_system
from services.special_fn import F0, F0_estimate, h_at_zero, n_lambda, sigma, spectral_radius


logger = logging.getLogger(__name__)

DEFAULT_ETA = 0.3


def _weight(p: WalkParams, n: int, weight: Sequence[int]) -> Tuple[int, ...]:
    x = tuple(int(v) for v in weight)
    if len(x) != p.rank or any(v < 0 for v in x):
        raise InputError(f"weight {x} is not dominant of rank {p.rank}")
    if sum(x) > n:
        raise DomainError(f"|lambda| = {sum(x)} exceeds n = {n}")
    return x


def _phi(p: WalkParams, n: int, x: Tuple[int, ...]) -> float:
    return solve_stationary(PhaseProblem.from_position(p, n, x)).phi


def _value(regime: str, components: Dict[str, float]) -> EstimateValue:
    return EstimateValue(log_value=math.fsum(components.values()), regime=regime, components=components)


def _xlogx(x: float) -> float:
    return 0.0 if x == 0 else x * math.log(x)


def estimate_rank2(p: WalkParams, n: int, weight: Sequence[int], eta: float = DEFAULT_ETA,
                   variant: str = "envelope", phi: Optional[float] = None) -> EstimateValue:
    """
    Estimation optimale en rang 2.

    Pour |x| < n :
    (1+|x|)(1+x₁)(1+x₂) / (n³√(n−|x|)√(n−x₁∨x₂)) · 𝝈ⁿ q^{−⟨ρ,x⟩} e^{nφ(δ)},
    δ = (x+ρ)/(n+2). Pour |x| = n :
    σⁿ q^{−n} nⁿ (x₁∨x₂)^{−(x₁∨x₂)} (x₁∧x₂+1)^{−(x₁∧x₂)−1/2}.

    Args:
        variant: "envelope" (enveloppe polynomiale) ou "spherical" (F₀ exacte)
        phi: φ(δ) déjà calculé (balayages)

    Raises:
        DomainError: si |x| > n
    """
    if p.rank != 2:
        raise InputError("estimate_rank2 requires rank 2")
    if variant not in ("envelope", "spherical"):
        raise InputError(f"unknown variant {variant!r}")
    x = _weight(p, n, weight)
    length = sum(x)
    top, low = max(x), min(x)

    if length == n:
        return _value("boundary", {
            "sigma_n": n * math.log(sigma(p)),
            "q_rho": -n * math.log(p.q),
            "prefactor": _xlogx(n) - _xlogx(top) - (low + 0.5) * math.log(low + 1),
            "gaussian": 0.0,
        })

    rho_pairing = float(root_system(2).rho_pairing(x))
    # (1+|x|)(1+x₁)(1+x₂) = F₀ q^{⟨ρ,x⟩} à constante près
    ground_state = F0(x, p) if variant == "spherical" else F0_estimate(x, p)
    ground = math.log(ground_state) + rho_pairing * math.log(p.q)
    phi = _phi(p, n, x) if phi is None else phi
    regime = "interior" if length <= (1 - eta) * n else "near-boundary"
    if variant == "spherical":
        regime += "-spherical"
    return _value(regime, {
        "prefactor": ground - 3 * math.log(n) - 0.5 * math.log(n - length) - 0.5 * math.log(n - top),
        "sigma_n": n * math.log(spectral_radius(p)),
        "q_rho": -rho_pairing * math.log(p.q),
        "gaussian": n * phi,
    })


def estimate_rank2_boundary(p: WalkParams, n: int, weight: Sequence[int]) -> EstimateValue:
    """
    Forme combinatoire près du bord (n−m ≤ |x| ≤ n), x₁ ≥ x₂, d = n−|x| :
    σⁿ q^{−n} n^{n+d} x₁^{−x₁} (x₂+1)^{−x₂−d−1/2}.
    """
    if p.rank != 2:
        raise InputError("the boundary form is stated in rank 2")
    x = _weight(p, n, weight)
    top, low = max(x), min(x)
    d = n - sum(x)
    return _value("boundary", {
        "sigma_n": n * math.log(sigma(p)),
        "q_rho": -n * math.log(p.q),
        "prefactor": (n + d) * math.log(n) - _xlogx(top) - (low + d + 0.5) * math.log(low + 1),
        "gaussian": 0.0,
    })


def estimate_rank1(p: WalkParams, n: int, k: int) -> EstimateValue:
    """
    Estimation sur l'arbre homogène :
    (1+k)/(n√(1+n−k)) · 𝝈ⁿ q^{−k/2} e^{nφ(δ)}, δ = (k+1)/(n+1).

    Un écart de parité donne log_value = −∞ (densité nulle).
    """
    if p.rank != 1:
        raise InputError("estimate_rank1 requires rank 1")
    if k < 0 or k > n:
        raise DomainError(f"|x| = {k} must lie in [0, n = {n}]")
    if (n - k) % 2:
        return EstimateValue(log_value=-math.inf, regime="parity", components={})
    regime = "boundary" if k == n else "interior"
    prefactor = math.log(1 + k) - (math.log(n) if n > 0 else 0.0) - 0.5 * math.log(1 + n - k)
    return _value(regime, {
        "prefactor": prefactor,
        "sigma_n": n * math.log(spectral_radius(p)),
        "q_rho": -0.5 * k * math.log(p.q),
        "gaussian": n * phi_rank1((k + 1) / (n + 1)),
    })


def _rankr_components(p: WalkParams, n: int, x: Tuple[int, ...], phi: Optional[float]) -> Dict[str, float]:
    system = root_system(p.rank)
    rho_pairing = float(system.rho_pairing(x))
    exponent = p.rank / 2 + system.num_positive
    phi = _phi(p, n, x) if phi is None else phi
    return {
        "prefactor": -exponent * math.log(n) + math.log(F0(x, p)) + rho_pairing * math.log(p.q),
        "sigma_n": n * math.log(spectral_radius(p)),
        "q_rho": -rho_pairing * math.log(p.q),
        "gaussian": n * phi,
    }


def estimate_rankr(p: WalkParams, n: int, weight: Sequence[int], eta: float = DEFAULT_ETA,
                   phi: Optional[float] = None) -> EstimateValue:
    """
    Estimation bilatérale n^{−r/2−|R⁺|} 𝝈ⁿ F₀(x) e^{nφ(δ)}, δ = (x+ρ)/(n+r),
    valable pour |x| ≤ (1−η)n.

    Raises:
        RegimeError: hors de ce régime (la borne supérieure s'applique)
    """
    x = _weight(p, n, weight)
    if sum(x) >= n:
        raise DomainError(f"|lambda| = {sum(x)} must be < n = {n}")
    if sum(x) > (1 - eta) * n:
        raise RegimeError(f"|lambda| = {sum(x)} exceeds (1 - eta) n = {(1 - eta) * n:g}", "upper_bound_rankr")
    return _value("interior", _rankr_components(p, n, x, phi))


def _upper_slack(p: WalkParams, n: int, x: Tuple[int, ...]) -> float:
    delta = np.array([(v + 1) / (n + p.rank) for v in x])
    roots = np.array(root_system(p.rank).positive_roots, dtype=float)
    return n * (1 - delta.sum()) - 0.5 * float(np.sum(np.log(1 - roots @ delta)))


def upper_bound_rankr(p: WalkParams, n: int, weight: Sequence[int], phi: Optional[float] = None) -> EstimateValue:
    """Borne supérieure : l'estimation bilatérale fois e^{n(1−|δ|)}/∏√(1−⟨α,δ⟩), |x| < n."""
    x = _weight(p, n, weight)
    if sum(x) >= n:
        raise DomainError(f"|lambda| = {sum(x)} must be < n = {n}")
    components = _rankr_components(p, n, x, phi)
    components["upper_slack"] = _upper_slack(p, n, x)
    return _value("upper-only", components)


def upper_tilde_rankr(p: WalkParams, n: int, weight: Sequence[int], phi: Optional[float] = None) -> EstimateValue:
    """
    Variante de la borne supérieure construite sur h̃ = h + 2 :
    𝝈 est remplacé par 𝝈̃ = σ(N+2), présentée pour comparaison.
    """
    value = upper_bound_rankr(p, n, weight, phi)
    components = dict(value.components)
    components["sigma_n"] = n * math.log(sigma(p) * (float(h_at_zero(p)) + 2))
    return _value("upper-only-tilde", components)


def estimate_weighted(p: WalkParams, n: int, weight: Sequence[int], eta: float = DEFAULT_ETA,
                      C: float = 1.0, phi: Optional[float] = None) -> EstimateValue:
    """
    Marche pondérée de rang 2.

    Pour |x| ≤ (1−η)n : n⁻⁴ 𝝈ⁿ F₀(x) e^{nφ(δ)} (bilatérale) ; pour
    (1−η)n < |x| < n : e^{C(n−|x|)}/(n³√(n−|x|)√(n−x₁∨x₂)) 𝝈ⁿ F₀(x) e^{nφ(δ)}
    (borne supérieure seulement).

    Raises:
        RegimeError: pour |x| = n, non couvert pour les marches pondérées
    """
    if p.rank != 2:
        raise InputError("weighted walks are defined in rank 2")
    x = _weight(p, n, weight)
    length = sum(x)
    if length == n:
        raise RegimeError("|lambda| = n is not covered for weighted walks", "density --method dp")
    phi = _phi(p, n, x) if phi is None else phi
    components = {
        "ground": math.log(F0(x, p)),
        "sigma_n": n * math.log(spectral_radius(p)),
        "gaussian": n * phi,
    }
    if length <= (1 - eta) * n:
        components["prefactor"] = -4 * math.log(n)
        return _value("interior", components)
    components["prefactor"] = (
        C * (n - length) - 3 * math.log(n) - 0.5 * math.log(n - length) - 0.5 * math.log(n - max(x))
    )
    return _value("upper-only", components)


def estimate(p: WalkParams, n: int, weight: Sequence[int], eta: float = DEFAULT_ETA,
             variant: str = "envelope") -> EstimateValue:
    """
    Estimation adaptée au rang et au régime.

    En rang ≥ 3 hors de |x| ≤ (1−η)n, c'est la borne supérieure qui est
    rendue (régime upper-only).
    """
    x = _weight(p, n, weight)
    if p.rank == 1:
        return estimate_rank1(p, n, x[0])
    if p.rank == 2 and not p.is_distinguished:
        return estimate_weighted(p, n, x, eta)
    if p.rank == 2:
        return estimate_rank2(p, n, x, eta, variant)
    if sum(x) > (1 - eta) * n:
        return upper_bound_rankr(p, n, x)
    return estimate_rankr(p, n, x, eta)


def _log_dp_density(mass, x, p: WalkParams) -> float:
    if mass == 0:
        return -math.inf
    return math.log(mass.numerator) - math.log(mass.denominator) - math.log(n_lambda(x, p))


def _batch_phi(p: WalkParams, n: int, weights: List[Tuple[int, ...]]) -> Dict[Tuple[int, ...], float]:
    interior = [x for x in weights if sum(x) < n]
    if not interior:
        return {}
    deltas = np.array([[(v + 1) / (n + p.rank) for v in x] for x in interior])
    values, _ = phi_batch(p, deltas)
    return dict(zip(interior, values.tolist()))


def _dominant_weights(rank: int, total: int) -> List[Tuple[int, ...]]:
    if rank == 1:
        return [(total,)]
    return [(head,) + tail for head in range(total, -1, -1) for tail in _dominant_weights(rank - 1, total - head)]


def _ball(rank: int, low: int, high: int) -> List[Tuple[int, ...]]:
    """Poids dominants avec low ≤ |x| ≤ high."""
    return [x for length in range(max(0, low), high + 1) for x in _dominant_weights(rank, length)]


def _sweep_cells(p: WalkParams, region: str, nmax: int, eta: float, m: int,
                 threads: int) -> Iterator[Tuple[int, Tuple[int, ...], float, float, str]]:
    """Cellules (n, x, log oracle, log estimation, régime) d'une région."""
    if region in ("rank2-full", "rank2-interior", "rank2-boundary", "rank1", "weighted-upper"):
        expected = 1 if region == "rank1" else 2
        if p.rank != expected:
            raise InputError(f"region {region} requires rank {expected}")
        if region == "weighted-upper" and p.is_distinguished:
            raise InputError("region weighted-upper requires --c1")
        for dist in dp_history(p, nmax):
            n = dist.n
            if n < 2:
                continue
            if region == "rank2-interior":
                weights = _ball(2, 0, int((1 - eta) * n))
            elif region == "rank2-boundary":
                weights = _ball(2, n - m, n)
            elif region == "rank1":
                weights = [(k,) for k in range(n % 2, n + 1, 2)]
            elif region == "weighted-upper":
                weights = [x for x in _ball(2, 0, n - 1) if sum(x) > (1 - eta) * n]
            else:
                weights = _ball(2, 0, n)
            phis = _batch_phi(p, n, weights) if region != "rank1" else {}

            def cell(x: Tuple[int, ...]):
                oracle = _log_dp_density(dist.mass(x), x, p)
                if region == "rank2-boundary":
                    value = estimate_rank2_boundary(p, n, x)
                elif region == "rank1":
                    value = estimate_rank1(p, n, x[0])
                elif region == "weighted-upper":
                    value = estimate_weighted(p, n, x, eta, C=0.0, phi=phis.get(x))
                else:
                    value = estimate_rank2(p, n, x, eta, phi=phis.get(x))
                return n, x, oracle, value.log_value, value.regime

            if threads > 1:
                with ThreadPoolExecutor(max_workers=threads) as pool:
                    yield from pool.map(cell, weights)
            else:
                yield from map(cell, weights)
        return

    if region in ("rankr-interior", "rankr-upper"):
        ns = sorted({nmax // 2, (3 * nmax) // 4, nmax} - {0, 1})
        for n in ns:
            if region == "rankr-interior":
                weights = _ball(p.rank, 0, int((1 - eta) * n))
            else:
                weights = _ball(p.rank, 0, n - 1)
            if p.rank <= 2:
                dist = dp_run(p, n)
                oracles = {x: _log_dp_density(dist.mass(x), x, p) for x in weights}
            else:
                oracles = {x: d.log_value for x, d in density_fourier_region(p, n, weights).items()}
            phis = _batch_phi(p, n, weights)
            for x in weights:
                if region == "rankr-interior":
                    value = estimate_rankr(p, n, x, eta, phi=phis[x])
                else:
                    value = upper_bound_rankr(p, n, x, phi=phis[x])
                yield n, x, oracles[x], value.log_value, value.regime
        return

    raise InputError(f"unknown region {region!r}")


def _band(rows: List[SweepRow], region: str) -> BandReport:
    valid = [row for row in rows if math.isfinite(row.ratio) and row.ratio > 0]
    if not valid:
        return BandReport(region=region, count=len(rows))
    low = min(valid, key=lambda row: row.ratio)
    high = max(valid, key=lambda row: row.ratio)
    return BandReport(
        region=region, count=len(rows), c_min=low.ratio, c_max=high.ratio,
        witness_min=[low.n, *low.x], witness_max=[high.n, *high.x],
    )


def certify_sweep(p: WalkParams, region: str, nmax: int, eta: float = DEFAULT_ETA, m: int = 4,
                  threads: int = 1) -> Tuple[BandReport, List[SweepRow]]:
    """
    Bande mesurée du rapport oracle / estimation sur une région.

    L'oracle est la programmation dynamique exacte en rang ≤ 2 et la forme
    de contour par FFT en rang 3. La bande est aussi mesurée sur la moitié
    n ≤ nmax/2 pour suivre son élargissement.

    Returns:
        (rapport de bande, lignes du balayage)
    """
    logger.info("=" * 80)
    logger.info(f"Certification sweep {region}: rank={p.rank}, q={p.q}, nmax={nmax}, eta={eta}, m={m}")
    rows = []
    for n, x, log_oracle, log_estimate, regime in _sweep_cells(p, region, nmax, eta, m, threads):
        if not math.isfinite(log_oracle) or not math.isfinite(log_estimate):
            # zéros structurels (parité, n ≤ 1) hors bande
            ratio = math.nan
        else:
            ratio = math.exp(log_oracle - log_estimate)
        rows.append(SweepRow(
            n=n, x=x, length=sum(x), d=n - sum(x), log_p_oracle=log_oracle,
            log_estimate=log_estimate, ratio=ratio, regime=regime,
        ))

    report = _band(rows, region)
    half = _band([row for row in rows if row.n <= nmax // 2], region)
    if report.ratio is not None and half.ratio is not None:
        report.half_ratio = half.ratio
        report.widening = report.ratio / half.ratio - 1
    if region == "weighted-upper":
        report.measured["C"] = measure_weighted_C(p, nmax, eta)
    logger.info(f"Band for {region}: c_min={report.c_min}, c_max={report.c_max}, widening={report.widening}")
    logger.info("=" * 80)
    return report, rows


def measure_weighted_C(p: WalkParams, nmax: int, eta: float = DEFAULT_ETA) -> float:
    """
    Plus petite constante C telle que pₙ ≤ K·borne(C) près du bord, K étant
    le maximum du rapport sur la région intérieure |x| ≤ (1−η)n.
    """
    if p.rank != 2:
        raise InputError("weighted walks are defined in rank 2")
    worst_interior = -math.inf
    boundary = []
    for dist in dp_history(p, nmax):
        n = dist.n
        if n < 2:
            continue
        weights = _ball(2, 0, n - 1)
        phis = _batch_phi(p, n, weights)
        for x in weights:
            oracle = _log_dp_density(dist.mass(x), x, p)
            value = estimate_weighted(p, n, x, eta, C=0.0, phi=phis[x])
            if value.regime == "interior":
                worst_interior = max(worst_interior, oracle - value.log_value)
            else:
                boundary.append((n - sum(x), oracle - value.log_value))
    if not boundary:
        return 0.0
    needed = max((excess - worst_interior) / d for d, excess in boundary)
    return max(0.0, needed)


def local_limit_profile(p: WalkParams, ns: Sequence[int]) -> Dict[int, float]:
    """n⁴ pₙ(0) 𝝈⁻ⁿ (rang 2, programmation dynamique exacte)."""
    if p.rank != 2:
        raise InputError("the local limit profile is computed in rank 2")
    wanted = set(ns)
    profile = {}
    radius = spectral_radius(p)
    for dist in dp_history(p, max(wanted)):
        if dist.n in wanted:
            log_p = _log_dp_density(dist.mass((0, 0)), (0, 0), p)
            profile[dist.n] = math.exp(4 * math.log(dist.n) + log_p - dist.n * math.log(radius))
    return profile

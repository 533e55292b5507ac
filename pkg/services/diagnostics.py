"""
Suites de vérification

Chaque suite regroupe des vérifications exactes ou mesurées et rend un
SuiteReport : identités d'exponentielles-polynômes, propriétés du point
stationnaire, positivité globale de la phase, Harnack, normalisation de
Plancherel, propriété de fonction propre de F₀, table radiale,
apériodicité, inégalité de bord de la phase et combinatoire de bord.
"""

import logging
import math
from fractions import Fraction
from typing import Callable, Dict, List, Optional

import numpy as np

from core.config import SUITES, RunConfig
from core.errors import InputError
from models import CheckResult, IdentityReport, SuiteReport, WalkParams
from services.exppoly import verify_identity
from services.fourier_kernel import density_contour, density_plancherel, integrand_periodicity
from services.phase import (
    PhaseProblem, check_blowup, check_lemma44, check_ray_monotonicity, dphi_check,
    global_psi_check, imaginary_phase_constant, lemma_diagnostics, measured_bands,
    random_deltas, solve_stationary,
)
from services.radial_dp import (
    build_table, choice_count, density_dp, dp_history, harnack_profile, region_of,
    iter_path_counts, path_count_band,
)
from services.special_fn import F0, f0_rank1, reachable, sigma_exact, spectral_radius


logger = logging.getLogger(__name__)


def _suite(name: str, checks: List[CheckResult], identities: Optional[List[IdentityReport]] = None) -> SuiteReport:
    identities = identities or []
    passed = all(c.passed for c in checks) and all(i.passed for i in identities)
    return SuiteReport(suite=name, passed=passed, checks=checks, identities=identities)


def suite_identities(p: WalkParams, run: RunConfig) -> SuiteReport:
    """Identités exactes applicables au rang demandé."""
    rank = p.rank
    reports: List[IdentityReport] = []
    if rank == 2:
        for name in ("ProductFormulaA2", "CoshProductA2", "DifferentiationFormulaA2",
                     "GeneralDifferentiationRankTwo", "ProductDiffTilde"):
            reports.append(verify_identity(name, 2))
    reports.append(verify_identity("ProductFormulaAr", rank))
    reports.append(verify_identity("WeylDenominator", rank))
    checks: List[CheckResult] = []
    if rank in (2, 3):
        first = verify_identity("DifferentiationFormula1Ar", rank, ns=range(0, 6))
        reports.append(first)
        reports.append(verify_identity("DifferentiationFormula2Ar", rank, ns=range(0, 9 if rank == 2 else 6)))
        if rank == 2:
            recovered = {n: values for n, values in first.coefficients.items()}
            ok = first.passed and all(values == ["c2=2"] for values in recovered.values())
            checks.append(CheckResult(
                name="c2-recovered", passed=ok, measured={"coefficients": recovered},
                detail="the rank-two remainder coefficient equals 2",
            ))
    return _suite("identities", checks, reports)


def suite_lemma34(p: WalkParams, run: RunConfig) -> SuiteReport:
    """Point stationnaire : résidus, dφ = −s, point en forme close, signes."""
    deltas = random_deltas(p.rank, 500, run.seed)
    worst = 0.0
    for delta in deltas:
        worst = max(worst, solve_stationary(PhaseProblem(p, tuple(delta))).grad_residual)
    checks = [CheckResult(
        name="stationary-residual", passed=worst <= 1e-12, measured={"max_residual": worst},
        detail="||dh(s)/h(s) - delta|| on 500 random points",
    )]

    fd_worst = 0.0
    for delta in random_deltas(p.rank, 20, run.seed + 1, max_length=0.95):
        fd_worst = max(fd_worst, dphi_check(PhaseProblem(p, tuple(delta))))
    checks.append(CheckResult(
        name="dphi", passed=fd_worst <= 1e-5, measured={"max_deviation": fd_worst},
        detail="central differences of phi against -s",
    ))

    if p.rank == 2 and p.is_distinguished:
        solution = solve_stationary(PhaseProblem(p, (3 / 14, 3 / 14)))
        error = max(abs(v - math.log(2)) for v in solution.s_root)
        checks.append(CheckResult(
            name="closed-form-point", passed=error <= 1e-9 and abs(solution.phi + 0.14291) <= 1e-5,
            measured={"s_error": error, "phi": solution.phi},
            detail="delta = (3/14, 3/14) gives s = (log 2) rho",
        ))
    directions = np.eye(p.rank) + 0.5
    checks.append(check_ray_monotonicity(p, directions))
    checks.append(check_blowup(p, np.ones(p.rank)))
    if p.rank == 2:
        checks.extend(lemma_diagnostics(p, deltas[:200]))
        bands = measured_bands(p, np.linspace(0, 8, 9))
        checks.append(CheckResult(
            name="hessian-band", passed=bands["min"] > 0 and math.isfinite(bands["max"]),
            measured=bands, detail="B compared with its two-term model",
        ))
        constant = imaginary_phase_constant(p, np.linspace(0, 6, 4))
        checks.append(CheckResult(
            name="imaginary-phase", passed=math.isfinite(constant), measured={"constant": constant},
            detail="|Im Psi(theta)| / (|theta| B(theta, theta)) for small theta",
        ))
    return _suite("lemma34", checks)


def suite_global_psi(p: WalkParams, run: RunConfig) -> SuiteReport:
    """min de −Re Ψ / B sur le tore et sur la grille s ∈ [0,8]²."""
    points = 101 if p.rank <= 2 else 21
    return _suite("global-psi", [global_psi_check(p, np.linspace(0, 8, 9), points=points)])


def suite_harnack(p: WalkParams, run: RunConfig) -> SuiteReport:
    """Harnack parabolique : minimum de p_{n+1}(λ)/pₙ(μ), stabilité en n."""
    n_max = max(run.nmax, 4)
    profile = harnack_profile(p, n_max, n_min=2 if p.rank == 2 else 1)
    if p.rank == 1:
        # arbre biparti : seules les paires de parités opposées comptent
        profile = [row for row in profile if row["min_ratio"] > 0]
    values = [row["min_ratio"] for row in profile]
    full = min(values)
    half = min(row["min_ratio"] for row in profile if row["n"] <= n_max // 2)
    drift = abs(full / half - 1)
    return _suite("harnack", [CheckResult(
        name="harnack", passed=full > 0 and drift < 0.1,
        measured={"min_ratio": full, "half_min_ratio": half, "drift": drift},
        detail="min over adjacent pairs of p_{n+1}(lambda)/p_n(mu)",
    )])


def suite_plancherel(p: WalkParams, run: RunConfig) -> SuiteReport:
    """Normalisation p₀(0) = 1, périodicité, symétrie et recoupements."""
    origin = (0,) * p.rank
    checks = []
    for method, fn in (("contour", density_contour), ("raw", density_plancherel)):
        value = math.exp(fn(p, 0, origin).log_value)
        checks.append(CheckResult(
            name=f"normalization-{method}", passed=abs(value - 1) < 1e-7,
            measured={"p0": value}, detail="n = 0, lambda = 0",
        ))
    deviation = integrand_periodicity(p, 5, origin, seed=run.seed)
    checks.append(CheckResult(
        name="periodicity", passed=deviation <= 1e-9, measured={"max_deviation": deviation},
        detail="integrand invariant under theta -> theta + 2 pi alpha_j",
    ))
    if p.rank == 2 and p.is_distinguished:
        worst = 0.0
        for n, x in ((5, (3, 1)), (10, (4, 2)), (20, (7, 3))):
            a = density_contour(p, n, x).log_value
            b = density_contour(p, n, x[::-1]).log_value
            worst = max(worst, abs(math.expm1(a - b)))
        checks.append(CheckResult(
            name="diagram-symmetry", passed=worst <= 1e-7, measured={"max_relative": worst},
            detail="p_n(a, b) = p_n(b, a)",
        ))
    if p.rank <= 2:
        worst = 0.0
        witness = None
        for n in (2, 5, 10):
            for x in _small_weights(p.rank, n):
                exact = density_dp(p, n, x)
                if exact == 0:
                    continue
                for fn in (density_contour, density_plancherel):
                    value = fn(p, n, x).log_value
                    error = abs(math.expm1(value - math.log(exact)))
                    if error > worst:
                        worst, witness = error, [n, *x]
        checks.append(CheckResult(
            name="exact-agreement", passed=worst <= 1e-6, measured={"max_relative": worst},
            witness=None if worst <= 1e-6 else witness, detail="Fourier forms against the exact chain",
        ))
    return _suite("plancherel", checks)


def _small_weights(rank: int, n: int) -> List[tuple]:
    if rank == 1:
        return [(k,) for k in range(n % 2, min(n, 4) + 1, 2)]
    return [x for x in ((0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (3, 1), (5, 5), (10, 0)) if sum(x) <= n]


def suite_eigenfunction(p: WalkParams, run: RunConfig) -> SuiteReport:
    """
    F₀ est fonction propre de la chaîne radiale de valeur propre 𝝈 :
    Σ_μ p⁺(λ,μ) F₀(μ) = 𝝈 F₀(λ).
    """
    if p.rank not in (1, 2):
        raise InputError("the eigenfunction suite uses the radial table (ranks 1 and 2)")
    table = build_table(p)
    radius = spectral_radius(p)
    weights = [(k,) for k in range(13)] if p.rank == 1 else [(a, b) for a in range(13) for b in range(13 - a)]
    worst = 0.0
    witness = None
    for x in weights:
        row = table.entries[region_of(x)]
        image = sum(float(prob) * F0(tuple(a + b for a, b in zip(x, mu)), p) for mu, prob in row.items())
        error = abs(image / (radius * F0(x, p)) - 1)
        if error > worst:
            worst, witness = error, list(x)
    checks = [CheckResult(
        name="eigenfunction", passed=worst <= 1e-9, measured={"max_relative": worst},
        witness=None if worst <= 1e-9 else witness, detail="radial averaging of F0",
    )]
    if p.rank == 1:
        closed = max(abs(F0((k,), p) / f0_rank1(k, p.q) - 1) for k in range(8))
        checks.append(CheckResult(
            name="rank-one-closed-form", passed=closed <= 1e-10, measured={"max_relative": closed},
            detail="F0(k) = q^(-k/2) (1 + k (q-1)/(q+1))",
        ))
    return _suite("eigenfunction", checks)


def distinguished_table(q: int) -> Dict[str, Dict[tuple, Fraction]]:
    """Table radiale distinguée de rang 2 écrite terme à terme."""
    s = Fraction(q, 2 * (q * q + q + 1))
    return {
        "interior": {
            (1, 0): s * q, (0, 1): s * q, (1, -1): s, (-1, 1): s,
            (-1, 0): s / q, (0, -1): s / q,
        },
        "wall-1": {(0, 1): s * (q + 1), (1, 0): s * q, (-1, 1): s * (1 + Fraction(1, q)), (-1, 0): s / q},
        "wall-2": {(1, 0): s * (q + 1), (0, 1): s * q, (1, -1): s * (1 + Fraction(1, q)), (0, -1): s / q},
        "origin": {(1, 0): Fraction(1, 2), (0, 1): Fraction(1, 2)},
    }


def suite_table(p: WalkParams, run: RunConfig) -> SuiteReport:
    """Table radiale exacte : sommes de lignes et accord avec la table distinguée."""
    table = build_table(p)
    sums = {name: str(sum(row.values())) for name, row in table.entries.items()}
    checks = [CheckResult(
        name="row-sums", passed=all(v == "1" for v in sums.values()), measured=sums,
        detail="each row sums to exactly 1",
    )]
    if p.rank == 2 and p.is_distinguished:
        expected = distinguished_table(p.q)
        matches = all(table.entries[name] == row for name, row in expected.items())
        checks.append(CheckResult(
            name="distinguished-table", passed=matches,
            measured={"sigma": str(sigma_exact(p))}, detail="entry-by-entry exact comparison",
        ))
    return _suite("table", checks)


def suite_aperiodicity(p: WalkParams, run: RunConfig) -> SuiteReport:
    """Le support de pₙ coïncide avec l'ensemble atteignable pour tout n ≤ N_max."""
    n_max = max(run.nmax, 2)
    mismatch = None
    for dist in dp_history(p, n_max):
        support = set(dist.support())
        expected = {x for x in _all_weights(p.rank, dist.n) if reachable(p.rank, dist.n, x)}
        if support != expected:
            mismatch = [dist.n, *sorted(support ^ expected)[0]]
            break
    return _suite("aperiodicity", [CheckResult(
        name="support", passed=mismatch is None, measured={"n_max": n_max},
        witness=mismatch, detail="p_n(lambda) > 0 exactly on the reachable set",
    )])


def _all_weights(rank: int, n: int) -> List[tuple]:
    if rank == 1:
        return [(k,) for k in range(n + 1)]
    return [(a, b) for a in range(n + 1) for b in range(n + 1 - a)]


def suite_lemma44(p: WalkParams, run: RunConfig) -> SuiteReport:
    """h(s)(1−|δ|) = ϖ(s) − 2 ≥ 2 sur des δ aléatoires."""
    return _suite("lemma44", [check_lemma44(p, random_deltas(p.rank, 200, run.seed))])


def suite_boundary(p: WalkParams, run: RunConfig) -> SuiteReport:
    """Combinatoire de bord : M ≥ nombre de choix, bande du nombre de chemins."""
    if p.rank != 2:
        raise InputError("the boundary combinatorics are stated in rank 2")
    d_max = run.m
    violation = None
    for n, counts in iter_path_counts(min(run.nmax, 60), d_max, p):
        for x, count in counts.items():
            if choice_count(n, x) > count:
                violation = [n, *x]
                break
        if violation:
            break
    checks = [CheckResult(
        name="choice-count", passed=violation is None, witness=violation,
        detail="closed-form choice count never exceeds the number of paths",
    )]
    full = path_count_band(max(run.nmax, 4), d_max, p)
    half = path_count_band(max(run.nmax, 4) // 2, d_max, p)
    widening = full["ratio"] / half["ratio"] - 1
    checks.append(CheckResult(
        name="path-count-band", passed=full["min"] > 0 and math.isfinite(full["max"]),
        measured={"min": full["min"], "max": full["max"], "widening": widening},
        detail="M x1^x1 (x2+1)^(x2+d+1/2) / n^(n+d)",
    ))
    return _suite("boundary", checks)


SUITE_RUNNERS: Dict[str, Callable[[WalkParams, RunConfig], SuiteReport]] = {
    "identities": suite_identities,
    "lemma34": suite_lemma34,
    "global-psi": suite_global_psi,
    "harnack": suite_harnack,
    "plancherel": suite_plancherel,
    "eigenfunction": suite_eigenfunction,
    "table": suite_table,
    "aperiodicity": suite_aperiodicity,
    "lemma44": suite_lemma44,
    "boundary": suite_boundary,
}


def run_suite(name: str, p: WalkParams, run: RunConfig) -> SuiteReport:
    """
    Exécute une suite de vérification.

    Raises:
        InputError: suite inconnue
    """
    if name not in SUITE_RUNNERS:
        raise InputError(f"unknown suite {name!r}; expected one of {', '.join(SUITES)}")
    logger.info("=" * 80)
    logger.info(f"Running suite {name} for rank={p.rank}, q={p.q}")
    report = SUITE_RUNNERS[name](p, run)
    logger.info(f"Suite {name}: {'passed' if report.passed else 'FAILED'}")
    logger.info("=" * 80)
    return report

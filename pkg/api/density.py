"""
Commandes de requête ponctuelle

Ce module contient les commandes density (pₙ(λ) par la méthode choisie,
avec l'estimation et le rapport) et phase (point stationnaire de Φ_δ).
"""

import logging
import math
from typing import Callable, Dict, Optional, Sequence, Tuple

from core.config import AppConfig, QuadratureConfig, RunConfig
from core.errors import InputError, NumericError
from models import DensityRecord, LogDensity, PhaseRecord, WalkParams
from services.estimates import estimate
from services.fourier_kernel import density_contour, density_plancherel
from services.phase import PhaseProblem, solve_stationary
from services.radial_dp import density_dp
from services.special_fn import reachable


logger = logging.getLogger(__name__)


def walk_params(run: RunConfig) -> WalkParams:
    """Paramètres de marche décrits par la requête."""
    if run.c1 is not None:
        return WalkParams.weighted(run.q, run.c1)
    return WalkParams.distinguished(run.rank, run.q)


def requested_weight(run: RunConfig) -> Tuple[int, ...]:
    """λ de la requête, l'origine par défaut."""
    return tuple(run.x) if run.x else (0,) * run.rank


def compute_density(p: WalkParams, n: int, weight: Sequence[int], method: str = "auto",
                    cfg: Optional[QuadratureConfig] = None) -> LogDensity:
    """
    Aiguillage entre les méthodes de calcul de pₙ(λ).

    Args:
        method: dp, fourier, fourier-raw, estimate ou auto (dp en rang ≤ 2,
            fourier sinon)
    """
    if method == "auto":
        method = "dp" if p.rank <= 2 else "fourier"
    if method == "dp":
        value = density_dp(p, n, weight)
        log_value = -math.inf if value == 0 else math.log(value.numerator) - math.log(value.denominator)
        return LogDensity(log_value=log_value, method="dp", error_estimate=0.0)
    if method == "fourier":
        return density_contour(p, n, weight, cfg)
    if method == "fourier-raw":
        return density_plancherel(p, n, weight, cfg)
    if method == "estimate":
        return LogDensity(log_value=estimate(p, n, weight).log_value, method="estimate")
    raise InputError(f"unknown method {method!r}")


def _estimate_log(p: WalkParams, n: int, x: Tuple[int, ...], run: RunConfig) -> Optional[float]:
    """log de l'estimation fermée quand elle s'applique, None sinon."""
    if n < 2 or not reachable(p.rank, n, x):
        return None
    try:
        value = estimate(p, n, x, run.eta, run.variant).log_value
    except (InputError, NumericError) as e:
        logger.info(f"No estimate for n={n}, lambda={x}: {e}")
        return None
    return value if math.isfinite(value) else None


def create_density_commands(config: AppConfig) -> Dict[str, Callable[[], object]]:
    """
    Crée les commandes de requête ponctuelle avec la configuration injectée.

    Args:
        config: configuration de l'application (requête comprise)

    Returns:
        Dictionnaire nom de commande -> gestionnaire
    """

    def cmd_density() -> DensityRecord:
        """
        Densité pₙ(λ) par la méthode demandée.

        La programmation dynamique rend la valeur exacte (numérateur et
        dénominateur décimaux) ; les autres méthodes rendent log pₙ(λ).

        Returns:
            Enregistrement JSON de la requête
        """
        run = config.run
        p = walk_params(run)
        x = requested_weight(run)
        method = run.method
        if method == "auto":
            method = "dp" if p.rank <= 2 else "fourier"
        logger.info(f"density: rank={p.rank}, q={p.q}, n={run.n}, lambda={x}, method={method}")

        record = {
            "rank": p.rank, "q": p.q, "c1": str(run.c1) if run.c1 is not None else None,
            "n": run.n, "lambda": list(x), "method": method,
        }
        if method == "dp":
            value = density_dp(p, run.n, x)
            log_value = -math.inf if value == 0 else math.log(value.numerator) - math.log(value.denominator)
            record.update(
                exact=True, numerator=str(value.numerator), denominator=str(value.denominator),
                exact_value=str(value), quadrature_error=None,
            )
        else:
            result = compute_density(p, run.n, x, method, config.quadrature)
            log_value = result.log_value
            record.update(exact=False, quadrature_error=result.error_estimate)

        estimate_log = log_value if method == "estimate" else _estimate_log(p, run.n, x, run)
        ratio = None
        if method != "estimate" and estimate_log is not None and math.isfinite(log_value):
            ratio = math.exp(log_value - estimate_log)
        if math.isinf(log_value):
            shown = 0.0
        else:
            shown = math.exp(log_value) if log_value > -745 else None
        if shown is not None and not (0.0 <= shown <= 1.0 + 1e-12) and method != "estimate":
            raise NumericError(f"density {shown} outside [0, 1]", [log_value])
        record.update(
            log_density=log_value if math.isfinite(log_value) else None,
            density=shown, estimate_log=estimate_log, ratio=ratio,
        )
        return DensityRecord(**record)

    def cmd_phase() -> PhaseRecord:
        """
        Point stationnaire s(δ), φ(δ) et forme B en s.

        δ vient de --delta ou, à défaut, de la position (n, λ).

        Returns:
            Enregistrement JSON de la solution
        """
        run = config.run
        p = walk_params(run)
        if run.delta is not None:
            problem = PhaseProblem(p, tuple(run.delta))
        else:
            problem = PhaseProblem.from_position(p, run.n, requested_weight(run))
        solution = solve_stationary(problem, config.phase)
        logger.info(f"phase: delta={problem.delta}, phi={solution.phi:.6g}, iterations={solution.iterations}")
        return PhaseRecord(rank=p.rank, q=p.q, delta=list(problem.delta), solution=solution)

    return {"density": cmd_density, "phase": cmd_phase}
